#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

#include "wdn/builtin.hpp"
#include "wdn/model.hpp"

using namespace wdn;

namespace {

// Synthesizes a noise-free dataset from known per-edge coefficients so the
// fit has an exact answer to recover.
TrajectoryDataset make_dataset(int S, Rng& rng) {
  TrajectoryDataset data;
  data.edges = {{"p1", 0, 1, 2.0}, {"p2", 1, 0, 4.0}, {"p3", 1, 2, 4.0}};
  data.h.resize(S, 2);
  data.u.resize(S, 2);
  data.d_a.resize(S);
  data.q.resize(S, 3);
  for (int t = 0; t < S; ++t) {
    for (int j = 0; j < 2; ++j) {
      data.h(t, j) = rng.uniform(1.0, 3.0);
      data.u(t, j) = rng.uniform(0.0, 100.0);
    }
    data.d_a(t) = rng.uniform(50.0, 90.0);
  }
  return data;
}

const RowVector kA1 = (RowVector(2) << -0.031, 0.027).finished();
const RowVector kB11 = (RowVector(2) << 0.0026, 0.0010).finished();
const double kB21 = -0.0024;
const RowVector kA2 = (RowVector(2) << 0.17, -0.11).finished();
const RowVector kB12 = (RowVector(2) << 0.0012, 0.0071).finished();
const double kB22 = -0.0031;
const RowVector kA3 = (RowVector(2) << 0.0, -0.06).finished();
const RowVector kB13 = (RowVector(2) << 0.0020, 0.0069).finished();
const double kB23 = -0.0025;

void fill_flows(TrajectoryDataset& data) {
  const int S = data.samples();
  for (int t = 0; t < S; ++t) {
    const Vector h = data.h.row(t).transpose();
    const Vector u = data.u.row(t).transpose();
    data.q(t, 0) = (kA1 * h + kB11 * u).value() + kB21 * data.d_a(t);
    data.q(t, 1) = (kA2 * h + kB12 * u).value() + kB22 * data.d_a(t);
    data.q(t, 2) = (kA3 * h + kB13 * u).value() + kB23 * data.d_a(t);
  }
}

}  // namespace

TEST_CASE("edge surrogate fit recovers exact coefficients from noise-free data") {
  Rng rng(11);
  TrajectoryDataset data = make_dataset(40, rng);
  fill_flows(data);

  const EdgeFit f0 = fit_edge_surrogate(data, 0);
  CHECK((f0.a - kA1).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((f0.b1 - kB11).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(std::abs(f0.b2 - kB21) < 1e-9);
  CHECK(f0.residuals.cwiseAbs().maxCoeff() < 1e-9);

  const EdgeFit f1 = fit_edge_surrogate(data, 1);
  CHECK((f1.a - kA2).cwiseAbs().maxCoeff() < 1e-9);

  // Known additive noise on one edge shows up as that edge's residuals.
  TrajectoryDataset noisy = data;
  Vector eps(noisy.samples());
  for (int t = 0; t < noisy.samples(); ++t) eps(t) = 1e-3 * std::sin(0.7 * t);
  eps -= Vector::Constant(noisy.samples(), eps.mean());
  noisy.q.col(2) += eps;
  const EdgeFit f2 = fit_edge_surrogate(noisy, 2);
  // Least squares projects the noise out of the regressor range; the fitted
  // residuals must reproduce y - X theta for the recovered theta.
  Vector pred(noisy.samples());
  for (int t = 0; t < noisy.samples(); ++t) {
    pred(t) = (f2.a * noisy.h.row(t).transpose() + f2.b1 * noisy.u.row(t).transpose()).value() +
              f2.b2 * noisy.d_a(t);
  }
  CHECK((noisy.q.col(2) - pred - f2.residuals).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("edge surrogate fit error handling") {
  Rng rng(5);
  TrajectoryDataset data = make_dataset(40, rng);
  fill_flows(data);

  SUBCASE("edge index out of range") {
    CHECK_THROWS_AS(fit_edge_surrogate(data, 3), ValidationError);
    CHECK_THROWS_AS(fit_edge_surrogate(data, -1), ValidationError);
  }

  SUBCASE("too few samples") {
    TrajectoryDataset small = data;
    small.h.conservativeResize(3, Eigen::NoChange);
    small.u.conservativeResize(3, Eigen::NoChange);
    small.d_a.conservativeResize(3);
    small.q.conservativeResize(3, Eigen::NoChange);
    CHECK_THROWS_AS(fit_edge_surrogate(small, 0), SolverError);
  }

  SUBCASE("rank-deficient regressor names the edge") {
    TrajectoryDataset degen = data;
    degen.u.col(1) = 2.0 * degen.u.col(0);  // collinear pump columns
    fill_flows(degen);
    CHECK_THROWS_WITH_AS(fit_edge_surrogate(degen, 1),
                         doctest::Contains("edge 'p2'"), SolverError);
  }

  SUBCASE("mismatched dimensions") {
    TrajectoryDataset bad = data;
    bad.q.conservativeResize(Eigen::NoChange, 2);
    CHECK_THROWS_AS(fit_edge_surrogate(bad, 0), ValidationError);
  }
}

TEST_CASE("continuous model assembly sums edge fits per tank over area") {
  Rng rng(7);
  TrajectoryDataset data = make_dataset(60, rng);
  fill_flows(data);

  std::vector<EdgeFit> fits;
  for (int e = 0; e < 3; ++e) fits.push_back(fit_edge_surrogate(data, e));
  auto [model, wm] = assemble_continuous_model(data, fits);

  // Tank 0 is fed by edge p1 (area 2); tank 1 by p2 and p3 (area 4).
  CHECK((model.A.row(0) - kA1 / 2.0).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((model.A.row(1) - (kA2 + kA3) / 4.0).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((model.B1.row(0) - kB11 / 2.0).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((model.B1.row(1) - (kB12 + kB13) / 4.0).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(std::abs(model.B2(0, 0) - kB21 / 2.0) < 1e-9);
  CHECK(std::abs(model.B2(1, 0) - (kB22 + kB23) / 4.0) < 1e-9);

  REQUIRE(static_cast<int>(wm.size()) == data.samples());
  for (const auto& w : wm) CHECK(w.cwiseAbs().maxCoeff() < 1e-8);

  SUBCASE("tank without edges is rejected") {
    TrajectoryDataset orphan = data;
    for (auto& e : orphan.edges) e.tank = 0;
    CHECK_THROWS_AS(assemble_continuous_model(orphan, fits), ValidationError);
  }

  SUBCASE("inconsistent areas are rejected") {
    TrajectoryDataset bad = data;
    bad.edges[2].tank_area = 3.0;  // p2 and p3 feed the same tank
    CHECK_THROWS_AS(assemble_continuous_model(bad, fits), ValidationError);
  }
}

TEST_CASE("RK4 discretization is the degree-4 Taylor map of the augmented system") {
  ContinuousTankModel c;
  c.A = (Matrix(2, 2) << -0.02, 0.015, 0.05, -0.045).finished();
  c.B1 = (Matrix(2, 2) << 0.0013, 0.0005, 0.0008, 0.0036).finished();
  c.B2 = (Matrix(2, 1) << -0.0012, -0.0014).finished();
  const double dt = 1.0;

  const LinearTankModel d = discretize_rk4(c, dt);

  // Independent oracle: truncated exponential series computed directly.
  const Matrix X = c.A * dt;
  const Matrix Ad = Matrix::Identity(2, 2) + X + X * X / 2.0 + X * X * X / 6.0 +
                    X * X * X * X / 24.0;
  CHECK((d.Ad - Ad).cwiseAbs().maxCoeff() < 1e-14);

  // The input maps equal Psi B with Psi = dt (I + X/2 + X^2/6 + X^3/24).
  const Matrix Psi =
      dt * (Matrix::Identity(2, 2) + X / 2.0 + X * X / 6.0 + X * X * X / 24.0);
  CHECK((d.Bd1 - Psi * c.B1).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((d.Bd2 - Psi * c.B2).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((d.Bd3 - Psi).cwiseAbs().maxCoeff() < 1e-14);

  // For a slow contraction the Taylor map is exponentially accurate.
  CHECK((d.Ad - (c.A * dt).exp()).cwiseAbs().maxCoeff() < 1e-8);

  // Halving the step shrinks the O(dt^5) local error; two fine steps beat one
  // coarse step against the exact exponential.
  const LinearTankModel fine = discretize_rk4(c, dt / 2.0);
  const Matrix expm = (c.A * dt).exp();
  const double coarse_err = (d.Ad - expm).cwiseAbs().maxCoeff();
  const double fine_err = (fine.Ad * fine.Ad - expm).cwiseAbs().maxCoeff();
  CHECK(fine_err < coarse_err);
  CHECK(fine_err < 1e-9);

  CHECK_THROWS_AS(discretize_rk4(c, 0.0), ValidationError);
}

TEST_CASE("published two-tank model is consistent with its continuous source") {
  const LinearTankModel model = builtin::two_tank_model();
  model.validate();
  REQUIRE(model.source.has_value());

  // The source drift is the exact matrix log, so the degree-4 map re-creates
  // Ad only up to the Taylor truncation error.
  const LinearTankModel re = discretize_rk4(*model.source, model.dt);
  CHECK((re.Ad - model.Ad).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((re.Bd1 - model.Bd1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((re.Bd2 - model.Bd2).cwiseAbs().maxCoeff() < 1e-12);

  // The discrete drift stays close to the true matrix exponential.
  const Matrix expm = (model.source->A * model.dt).exp();
  CHECK((model.Ad - expm).cwiseAbs().maxCoeff() < 1e-6);

  // Level dynamics are stable and demand lowers both tanks.
  CHECK(model.Ad.eigenvalues().cwiseAbs().maxCoeff() < 1.0);
  CHECK(model.Bd2(0, 0) < 0.0);
  CHECK(model.Bd2(1, 0) < 0.0);
}

TEST_CASE("nominal prediction matches a hand-rolled recursion") {
  const LinearTankModel model = builtin::two_tank_model();
  Rng rng(3);
  Vector h0(2);
  h0 << 2.2, 2.0;
  std::vector<Vector> v;
  Vector d_bar(5);
  for (int j = 0; j < 5; ++j) {
    v.push_back((Vector(2) << rng.uniform(0, 100), rng.uniform(0, 100)).finished());
    d_bar(j) = rng.uniform(60, 90);
  }

  const auto traj = predict_nominal(model, h0, v, d_bar);
  REQUIRE(static_cast<int>(traj.size()) == 6);
  Vector h = h0;
  for (int j = 0; j < 5; ++j) {
    h = model.Ad * h + model.Bd1 * v[j] + model.Bd2 * Vector::Constant(1, d_bar(j));
    CHECK((traj[j + 1] - h).cwiseAbs().maxCoeff() < 1e-14);
  }

  CHECK_THROWS_AS(predict_nominal(model, h0, v, d_bar.head(4)), ValidationError);
}

TEST_CASE("stage cost is price times pump power") {
  const PumpPressureModel pr = builtin::two_tank_pressure();
  Vector v(2), h(2);
  v << 40.0, 25.0;
  h << 2.4, 1.9;
  const double price = 0.7;

  const Vector p_out = pr.C * h + pr.D * v;
  const double expected = price * v.dot(p_out - pr.p_in);
  CHECK(stage_cost(price, v, h, pr) == doctest::Approx(expected).epsilon(1e-12));

  // Zero flow costs nothing regardless of head.
  CHECK(stage_cost(price, Vector::Zero(2), h, pr) == doctest::Approx(0.0));

  CHECK_THROWS_AS(stage_cost(price, Vector::Zero(3), h, pr), ValidationError);
}
