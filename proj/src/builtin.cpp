#include "wdn/builtin.hpp"

#include <cmath>
#include <complex>

#include <Eigen/Eigenvalues>

namespace wdn::builtin {

Matrix real_matrix_log(const Matrix& M) {
  if (M.rows() != M.cols()) throw ValidationError("matrix log: matrix must be square");
  Eigen::EigenSolver<Matrix> es(M);
  if (es.info() != Eigen::Success) throw SolverError("matrix log: eigendecomposition failed");
  Eigen::VectorXcd lam = es.eigenvalues();
  for (int i = 0; i < lam.size(); ++i) {
    if (lam(i).real() <= 0.0 || std::abs(lam(i).imag()) > 1e-9 * std::abs(lam(i)))
      throw ValidationError("matrix log: requires positive real eigenvalues");
    lam(i) = std::log(lam(i).real());
  }
  const Eigen::MatrixXcd V = es.eigenvectors();
  const Eigen::MatrixXcd L = V * lam.asDiagonal() * V.inverse();
  if (L.imag().cwiseAbs().maxCoeff() > 1e-9)
    throw SolverError("matrix log: result is not real");
  return L.real();
}

namespace {

// Degree-4 Taylor input map of the discretization: Psi = dt (I + A dt/2 +
// (A dt)^2/6 + (A dt)^3/24), so that Bd = Psi Bc.
Matrix input_map(const Matrix& A, double dt) {
  const int n = static_cast<int>(A.rows());
  const Matrix X = A * dt;
  return dt * (Matrix::Identity(n, n) + X / 2.0 + X * X / 6.0 + X * X * X / 24.0);
}

}  // namespace

LinearTankModel two_tank_model() {
  LinearTankModel mdl;
  mdl.Ad = (Matrix(2, 2) << 0.9867, 0.0134, 0.0417, 0.9577).finished();
  mdl.Bd1 = (Matrix(2, 2) << 0.0013, 0.0005, 0.0008, 0.0035).finished();
  mdl.Bd2 = (Matrix(2, 1) << -0.0012, -0.0014).finished();
  mdl.dt = 1.0;

  ContinuousTankModel src;
  src.A = real_matrix_log(mdl.Ad) / mdl.dt;
  const Matrix Psi = input_map(src.A, mdl.dt);
  const Matrix PsiInv = Psi.inverse();
  src.B1 = PsiInv * mdl.Bd1;
  src.B2 = PsiInv * mdl.Bd2;
  mdl.Bd3 = Psi;  // unit-gain model-error channel
  mdl.source = src;
  mdl.validate();
  return mdl;
}

DisturbanceSet two_tank_uncertainty() {
  return DisturbanceSet::diagonal((Vector(2) << 0.054, 0.083).finished());
}

ConstraintSpec two_tank_constraints() {
  const Vector h_max = (Vector(2) << 3.0, 2.8).finished();
  const Vector h_min = h_max / 2.0;  // keep tanks at least half full
  const Vector u_max = Vector::Constant(2, 100.0);
  return ConstraintSpec::box(h_min, h_max, u_max);
}

PumpPressureModel two_tank_pressure() {
  PumpPressureModel pm;
  pm.C = 2.0 * Matrix::Identity(2, 2);
  pm.D = 0.05 * Matrix::Identity(2, 2);
  pm.p_in = Vector::Ones(2);
  return pm;
}

Vector day_night_prices() {
  Vector p = Vector::Ones(24);
  for (int t = 0; t < 24; ++t)
    if (t >= 22 || t < 6) p(t) = 0.4;  // night tariff 22:00-06:00
  return p;
}

Vector diurnal_demand() {
  Vector d(24);
  for (int t = 0; t < 24; ++t)
    d(t) = 76.5 + 2.0 * std::sin(2.0 * M_PI * (t - 10.0) / 24.0);
  return d;
}

SystemSetup two_tank_setup() {
  SystemSetup s;
  s.model = two_tank_model();
  s.spec = two_tank_constraints();
  s.pressure = two_tank_pressure();
  s.dist = two_tank_uncertainty();
  s.prices = day_night_prices();
  s.demand = diurnal_demand();
  s.validate();
  return s;
}

ScenarioSpec normal_scenario(int days) { return ScenarioSpec{"normal", GeneratorBox::normal(2), days}; }

ScenarioSpec challenging_scenario(int days) {
  return ScenarioSpec{"challenging", GeneratorBox::challenging(), days};
}

ScenarioSpec extreme_scenario(int days) {
  return ScenarioSpec{"extreme", GeneratorBox::extreme(), days};
}

}  // namespace wdn::builtin
