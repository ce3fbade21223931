#include "wdn/uncertainty.hpp"

#include <Eigen/SVD>

#include <cmath>

#include "wdn/qp.hpp"

namespace wdn {

DisturbanceSet DisturbanceSet::diagonal(const Vector& radii) {
  DisturbanceSet s;
  s.E = radii.asDiagonal();
  return s;
}

bool DisturbanceSet::is_diagonal(double tol) const {
  if (E.rows() != E.cols()) return false;
  for (int i = 0; i < E.rows(); ++i) {
    for (int j = 0; j < E.cols(); ++j) {
      if (i != j && std::abs(E(i, j)) > tol) return false;
    }
  }
  return true;
}

bool DisturbanceSet::contains(const Vector& w, double tol) const {
  if (w.size() != n()) throw ValidationError("DisturbanceSet::contains: dimension mismatch");
  if (!w.allFinite()) return false;
  if (l() == 0) return w.lpNorm<Eigen::Infinity>() <= tol;

  if (is_diagonal()) {
    for (int k = 0; k < n(); ++k) {
      if (std::abs(w(k)) > std::abs(E(k, k)) + tol) return false;
    }
    return true;
  }

  // General zonotope: minimize ||g||_inf subject to E g = w.  The equality is
  // eliminated through an SVD (g = g0 + Z xi with Z spanning the nullspace),
  // leaving a small inequality-only LP.
  Eigen::JacobiSVD<Matrix> svd(E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-12);
  const int rank = static_cast<int>(svd.rank());
  const Vector g0 = svd.solve(w);
  if ((E * g0 - w).lpNorm<Eigen::Infinity>() > tol * (1.0 + w.lpNorm<Eigen::Infinity>())) {
    return false;  // w outside the range of E
  }
  const Matrix Z = svd.matrixV().rightCols(l() - rank);
  const int k = static_cast<int>(Z.cols());

  if (k == 0) return g0.lpNorm<Eigen::Infinity>() <= 1.0 + tol;

  // min t  s.t.  +-(g0 + Z xi) <= t
  const int nv = k + 1;
  QpProblem lp;
  lp.nvars = nv;
  lp.H = SpMat(nv, nv);
  lp.q = Vector::Zero(nv);
  lp.q(k) = 1.0;
  lp.Aeq = SpMat(0, nv);
  lp.beq = Vector::Zero(0);
  Matrix Ain(2 * l(), nv);
  Ain.topLeftCorner(l(), k) = Z;
  Ain.bottomLeftCorner(l(), k) = -Z;
  Ain.col(k).setConstant(-1.0);
  lp.Ain = Ain.sparseView();
  lp.bin = Vector(2 * l());
  lp.bin.head(l()) = -g0;
  lp.bin.tail(l()) = g0;

  IpmOptions opts;
  opts.tol = 1e-10;
  auto [x, report] = solve_dense_reference(lp, opts);
  if (report.status != SolveStatus::optimal) {
    throw SolverError("DisturbanceSet::contains: membership LP did not converge");
  }
  return x(k) <= 1.0 + tol;
}

void GeneratorBox::validate() const {
  if (lo.size() != hi.size()) throw ValidationError("GeneratorBox: lo/hi length mismatch");
  for (int i = 0; i < lo.size(); ++i) {
    if (lo(i) > hi(i)) throw ValidationError("GeneratorBox: lo > hi");
    if (lo(i) < -1.0 - 1e-12 || hi(i) > 1.0 + 1e-12) {
      throw ValidationError("GeneratorBox: intervals must lie within [-1, 1]");
    }
  }
}

GeneratorBox GeneratorBox::normal(int l) {
  return GeneratorBox{Vector::Constant(l, -1.0), Vector::Constant(l, 1.0)};
}

GeneratorBox GeneratorBox::challenging() {
  GeneratorBox b;
  b.lo = Vector(2);
  b.hi = Vector(2);
  b.lo << -1.0, 0.5;
  b.hi << -0.5, 1.0;
  return b;
}

GeneratorBox GeneratorBox::extreme() {
  GeneratorBox b;
  b.lo = Vector(2);
  b.hi = Vector(2);
  b.lo << -1.0, 1.0;
  b.hi << -1.0, 1.0;
  return b;
}

DisturbanceSet quantify_from_residuals(const std::vector<Vector>& samples) {
  if (samples.empty()) throw ValidationError("quantify_from_residuals: empty sample set");
  const int n = static_cast<int>(samples.front().size());
  Vector radii = Vector::Zero(n);
  for (const auto& s : samples) {
    if (s.size() != n) throw ValidationError("quantify_from_residuals: inconsistent sample sizes");
    radii = radii.cwiseMax(s.cwiseAbs());
  }
  return DisturbanceSet::diagonal(radii);
}

DisturbanceSet combine_sets(const DisturbanceSet& model_set, const ScalarDemandSet& demand_set,
                            const Matrix& Bd2, const Matrix& Bd3, CombineMode mode) {
  demand_set.validate();
  const int n = static_cast<int>(Bd2.rows());
  if (Bd2.cols() != 1 || Bd3.rows() != n || Bd3.cols() != model_set.n()) {
    throw ValidationError("combine_sets: dimension mismatch");
  }
  const Matrix mapped = Bd3 * model_set.E;  // n x l_m
  if (mode == CombineMode::exact) {
    DisturbanceSet out;
    out.E = Matrix(n, 1 + mapped.cols());
    out.E.col(0) = Bd2 * demand_set.e_d;
    out.E.rightCols(mapped.cols()) = mapped;
    return out;
  }
  // box: per-coordinate radius = |Bd2| e_d + row abs sums of Bd3 Em
  Vector radii = Bd2.cwiseAbs() * demand_set.e_d + mapped.cwiseAbs().rowwise().sum();
  return DisturbanceSet::diagonal(radii);
}

Vector sample_generator(const GeneratorBox& box, Rng& rng) {
  box.validate();
  Vector g(box.l());
  for (int i = 0; i < box.l(); ++i) {
    g(i) = (box.lo(i) == box.hi(i)) ? box.lo(i) : rng.uniform(box.lo(i), box.hi(i));
  }
  return g;
}

Vector elementwise_max_disturbance(const DisturbanceSet& set) {
  if (set.l() == 0) return Vector::Zero(set.n());
  return set.E.cwiseAbs().rowwise().sum();
}

}  // namespace wdn
