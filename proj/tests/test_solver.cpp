#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wdn/qp.hpp"

using namespace wdn;

namespace {

SpMat sparse(const Matrix& M) { return M.sparseView(); }

QpProblem random_qp(int nv, int ne, int mi, Rng& rng) {
  Matrix W(nv + 2, nv);
  for (int i = 0; i < W.rows(); ++i)
    for (int j = 0; j < nv; ++j) W(i, j) = rng.uniform(-1.0, 1.0);
  Matrix H = W.transpose() * W + 0.1 * Matrix::Identity(nv, nv);

  QpProblem p;
  p.nvars = nv;
  p.H = sparse(H);
  p.q = Vector::NullaryExpr(nv, [&](Eigen::Index) { return rng.uniform(-2.0, 2.0); });
  p.c0 = rng.uniform(-1.0, 1.0);

  Matrix Aeq(ne, nv), Ain(mi, nv);
  for (int i = 0; i < ne; ++i)
    for (int j = 0; j < nv; ++j) Aeq(i, j) = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < mi; ++i)
    for (int j = 0; j < nv; ++j) Ain(i, j) = rng.uniform(-1.0, 1.0);

  // Build right-hand sides around a strictly feasible point.
  const Vector x0 = Vector::NullaryExpr(nv, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
  p.Aeq = sparse(Aeq);
  p.beq = Aeq * x0;
  p.Ain = sparse(Ain);
  p.bin = Ain * x0 + Vector::Constant(mi, 0.5);
  return p;
}

// KKT residual check for an inequality-constrained solve: recover multipliers
// by nonnegative least squares on the active set and verify stationarity.
double stationarity_gap(const QpProblem& p, const Vector& x, double active_tol = 1e-4) {
  const Vector grad = p.H * x + p.q;
  Matrix At(p.nvars, 0);
  for (int i = 0; i < p.Ain.rows(); ++i) {
    const double slack = p.bin(i) - (p.Ain * x)(i);
    if (slack < active_tol) {
      At.conservativeResize(Eigen::NoChange, At.cols() + 1);
      At.col(At.cols() - 1) = Matrix(p.Ain).row(i).transpose();
    }
  }
  Matrix Aall(p.nvars, At.cols() + p.Aeq.rows());
  Aall.leftCols(At.cols()) = At;
  if (p.Aeq.rows() > 0) Aall.rightCols(p.Aeq.rows()) = Matrix(p.Aeq).transpose();
  if (Aall.cols() == 0) return grad.lpNorm<Eigen::Infinity>();
  const Vector mult = Aall.colPivHouseholderQr().solve(-grad);
  return (grad + Aall * mult).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_CASE("convexify shift schedule") {
  SUBCASE("positive definite matrices are untouched") {
    Matrix H = (Matrix(2, 2) << 4.0, 1.0, 1.0, 3.0).finished();
    auto [Hs, shift] = convexify(sparse(H));
    CHECK(shift == 0.0);
    CHECK((Matrix(Hs) - H).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("zero matrix gets the base shift") {
    auto [Hs, shift] = convexify(SpMat(3, 3), 1e-8);
    CHECK(shift == 1e-8);
    CHECK(Matrix(Hs).diagonal().minCoeff() == 1e-8);
  }

  SUBCASE("indefinite matrix: smallest doubling that clears the spectrum") {
    // diag(1, -1) needs lambda >= 1 + eps; the doubling schedule
    // eps * 2^k first reaches that at 2^27 * 1e-8 = 1.34217728.
    Matrix H = (Matrix(2, 2) << 1.0, 0.0, 0.0, -1.0).finished();
    auto [Hs, shift] = convexify(sparse(H), 1e-8);
    const double expected = std::ldexp(1e-8, 27);
    CHECK(shift == doctest::Approx(expected).epsilon(1e-14));
    // One halving step is not enough: lambda/2 leaves a negative pivot.
    CHECK(shift / 2.0 < 1.0);
    CHECK(shift > 1.0);
    CHECK(Matrix(Hs)(1, 1) == doctest::Approx(-1.0 + expected));
  }
}

TEST_CASE("equality-constrained quadratic has a closed-form check") {
  // min 0.5 x'Hx + q'x  s.t.  sum x = 3, solved by a KKT linear system.
  Matrix H = (Matrix(3, 3) << 2, 0.3, 0, 0.3, 1.5, 0.2, 0, 0.2, 1.0).finished();
  Vector q(3);
  q << -1.0, 0.5, 0.25;

  QpProblem p;
  p.nvars = 3;
  p.H = sparse(H);
  p.q = q;
  p.Aeq = sparse(Matrix::Ones(1, 3));
  p.beq = Vector::Constant(1, 3.0);
  p.Ain = SpMat(0, 3);
  p.bin = Vector::Zero(0);

  Matrix kkt(4, 4);
  kkt.topLeftCorner(3, 3) = H;
  kkt.topRightCorner(3, 1) = Matrix::Ones(3, 1);
  kkt.bottomLeftCorner(1, 3) = Matrix::Ones(1, 3);
  kkt(3, 3) = 0.0;
  Vector rhs(4);
  rhs << -q, 3.0;
  const Vector xstar = kkt.lu().solve(rhs).head(3);

  for (bool dense : {false, true}) {
    auto [x, rep] = dense ? solve_dense_reference(p) : solve_sparse_ipm(p);
    CHECK(rep.status == SolveStatus::optimal);
    CHECK((x - xstar).cwiseAbs().maxCoeff() < 1e-7);
    const double obj = 0.5 * xstar.dot(H * xstar) + q.dot(xstar);
    CHECK(rep.objective == doctest::Approx(obj).epsilon(1e-8));
  }
}

TEST_CASE("active box constraints are resolved exactly") {
  // min (x1-2)^2 + (x2+2)^2  s.t.  |x| <= 1 componentwise: solution (1, -1)
  // with both bounds strictly active (nonzero multipliers).
  QpProblem p;
  p.nvars = 2;
  p.H = sparse(2.0 * Matrix::Identity(2, 2));
  p.q = (Vector(2) << -4.0, 4.0).finished();
  p.c0 = 8.0;
  p.Aeq = SpMat(0, 2);
  p.beq = Vector::Zero(0);
  Matrix Ain(4, 2);
  Ain << 1, 0, 0, 1, -1, 0, 0, -1;
  p.Ain = sparse(Ain);
  p.bin = Vector::Ones(4);

  auto [x, rep] = solve_sparse_ipm(p);
  CHECK(rep.status == SolveStatus::optimal);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(x(1) == doctest::Approx(-1.0).epsilon(1e-7));
  // (2-1)^2 + (-1+2)^2 = 2
  CHECK(rep.objective == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(rep.res_primal < 1e-7);
  CHECK(rep.res_comp < 1e-6);
  CHECK(rep.iterations > 0);
  CHECK(rep.iter_seconds.size() == static_cast<std::size_t>(rep.iterations));
}

TEST_CASE("pure linear programs solve with an empty Hessian") {
  // min -x1 - 2 x2  s.t.  x >= 0, x1 + x2 <= 4, x2 <= 3: optimum (1, 3).
  QpProblem p;
  p.nvars = 2;
  p.H = SpMat(2, 2);
  p.q = (Vector(2) << -1.0, -2.0).finished();
  p.Aeq = SpMat(0, 2);
  p.beq = Vector::Zero(0);
  Matrix Ain(4, 2);
  Ain << -1, 0, 0, -1, 1, 1, 0, 1;
  p.Ain = sparse(Ain);
  p.bin = (Vector(4) << 0, 0, 4, 3).finished();

  auto [x, rep] = solve_sparse_ipm(p);
  CHECK(rep.status == SolveStatus::optimal);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(x(1) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(rep.hessian_shift > 0.0);  // convexify kicked in on the zero Hessian
}

TEST_CASE("infeasible problems are flagged") {
  QpProblem p;
  p.nvars = 1;
  p.H = sparse(Matrix::Identity(1, 1));
  p.q = Vector::Zero(1);
  p.Aeq = SpMat(0, 1);
  p.beq = Vector::Zero(0);
  Matrix Ain(2, 1);
  Ain << 1.0, -1.0;  // x <= -1 and -x <= -1: empty
  p.Ain = sparse(Ain);
  p.bin = Vector::Constant(2, -1.0);

  auto [x, rep] = solve_sparse_ipm(p);
  CHECK(rep.status == SolveStatus::infeasible);

  auto [xd, repd] = solve_dense_reference(p);
  CHECK(repd.status == SolveStatus::infeasible);
}

TEST_CASE("sparse and dense paths agree on random strictly convex problems") {
  Rng rng(29);
  for (int trial = 0; trial < 12; ++trial) {
    QpProblem p = random_qp(6, 2, 8, rng);
    auto [xs, rs] = solve_sparse_ipm(p);
    auto [xd, rd] = solve_dense_reference(p);
    REQUIRE(rs.status == SolveStatus::optimal);
    REQUIRE(rd.status == SolveStatus::optimal);
    CHECK(std::abs(rs.objective - rd.objective) < 1e-7 * (1.0 + std::abs(rd.objective)));
    CHECK((xs - xd).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(stationarity_gap(p, xs) < 1e-4);

    // Feasibility of the returned point.
    CHECK((Matrix(p.Aeq) * xs - p.beq).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((Matrix(p.Ain) * xs - p.bin).maxCoeff() < 1e-7);
  }
}

TEST_CASE("badly scaled objectives still converge") {
  // Same geometry as the box test but with the objective scaled by 1e6,
  // mimicking the large-penalty soft formulations.
  QpProblem p;
  p.nvars = 2;
  p.H = sparse(2e6 * Matrix::Identity(2, 2));
  p.q = 1e6 * (Vector(2) << -4.0, 4.0).finished();
  p.c0 = 8e6;
  p.Aeq = SpMat(0, 2);
  p.beq = Vector::Zero(0);
  Matrix Ain(4, 2);
  Ain << 1, 0, 0, 1, -1, 0, 0, -1;
  p.Ain = sparse(Ain);
  p.bin = Vector::Ones(4);

  auto [x, rep] = solve_sparse_ipm(p);
  CHECK(rep.status == SolveStatus::optimal);
  CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(x(1) == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(rep.objective == doctest::Approx(2e6).epsilon(1e-6));
}

TEST_CASE("solver input validation") {
  QpProblem p;
  p.nvars = 2;
  p.H = SpMat(3, 3);  // wrong size
  p.q = Vector::Zero(2);
  p.Aeq = SpMat(0, 2);
  p.beq = Vector::Zero(0);
  p.Ain = SpMat(0, 2);
  p.bin = Vector::Zero(0);
  CHECK_THROWS_AS(solve_sparse_ipm(p), ValidationError);

  p.H = SpMat(2, 2);
  p.bin = Vector::Zero(1);  // bin without Ain row
  CHECK_THROWS_AS(solve_sparse_ipm(p), ValidationError);

  p.bin = Vector::Zero(0);
  solve_sparse_ipm(p);  // now well-formed (free minimum of zero objective)
}

TEST_CASE("dense reference refuses oversized problems") {
  QpProblem p;
  const int nv = 7000;
  p.nvars = nv;
  SpMat H(nv, nv);
  H.setIdentity();
  p.H = H;
  p.q = Vector::Zero(nv);
  p.Aeq = SpMat(0, nv);
  p.beq = Vector::Zero(0);
  p.Ain = SpMat(0, nv);
  p.bin = Vector::Zero(0);
  CHECK_THROWS_AS(solve_dense_reference(p), SolverError);
}
