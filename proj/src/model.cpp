#include "wdn/model.hpp"

#include <Eigen/QR>

#include <cmath>
#include <set>

namespace wdn {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

void ContinuousTankModel::validate() const {
  require(A.rows() == A.cols(), "ContinuousTankModel: A must be square");
  require(B1.rows() == A.rows(), "ContinuousTankModel: B1 row count mismatch");
  require(B2.rows() == A.rows() && B2.cols() == 1, "ContinuousTankModel: B2 must be n x 1");
  require(all_finite(A) && all_finite(B1) && all_finite(B2),
          "ContinuousTankModel: non-finite entries");
}

void LinearTankModel::validate() const {
  require(dt > 0.0, "LinearTankModel: dt must be positive");
  require(Ad.rows() == Ad.cols(), "LinearTankModel: Ad must be square");
  require(Bd1.rows() == Ad.rows(), "LinearTankModel: Bd1 row count mismatch");
  require(Bd2.rows() == Ad.rows() && Bd2.cols() == 1, "LinearTankModel: Bd2 must be n x 1");
  require(Bd3.rows() == Ad.rows() && Bd3.cols() == Ad.cols(),
          "LinearTankModel: Bd3 must be n x n");
  require(all_finite(Ad) && all_finite(Bd1) && all_finite(Bd2) && all_finite(Bd3),
          "LinearTankModel: non-finite entries");
}

void PumpPressureModel::validate() const {
  require(D.rows() == D.cols(), "PumpPressureModel: D must be square");
  require(C.rows() == D.rows(), "PumpPressureModel: C row count mismatch");
  require(p_in.size() == D.rows(), "PumpPressureModel: p_in length mismatch");
  require(all_finite(C) && all_finite(D) && p_in.allFinite(),
          "PumpPressureModel: non-finite entries");
}

void TrajectoryDataset::validate() const {
  require(!edges.empty(), "TrajectoryDataset: no edges");
  require(h.rows() == u.rows() && h.rows() == d_a.size() && h.rows() == q.rows(),
          "TrajectoryDataset: sample counts differ across columns");
  require(q.cols() == static_cast<Eigen::Index>(edges.size()),
          "TrajectoryDataset: flow column count does not match edge count");
  for (const auto& e : edges) {
    require(e.tank_area > 0.0, "TrajectoryDataset: tank area must be positive (edge " + e.id + ")");
  }
}

EdgeFit fit_edge_surrogate(const TrajectoryDataset& data, int edge) {
  data.validate();
  require(edge >= 0 && edge < static_cast<int>(data.edges.size()),
          "fit_edge_surrogate: edge index out of range");
  const int S = data.samples();
  const int n = data.n();
  const int m = data.m();
  if (S == 0) throw ValidationError("fit_edge_surrogate: empty dataset");
  const int cols = n + m + 1;
  if (S < cols) {
    throw SolverError("fit_edge_surrogate: edge '" + data.edges[edge].id +
                      "' has " + std::to_string(S) + " rows, needs at least " +
                      std::to_string(cols));
  }

  Matrix X(S, cols);
  X.leftCols(n) = data.h;
  X.middleCols(n, m) = data.u;
  X.col(n + m) = data.d_a;
  const Vector y = data.q.col(edge);

  Eigen::ColPivHouseholderQR<Matrix> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) {
    throw SolverError("fit_edge_surrogate: singular fit for edge '" + data.edges[edge].id +
                      "' (regressor rank " + std::to_string(qr.rank()) + " of " +
                      std::to_string(cols) + ")");
  }
  const Vector theta = qr.solve(y);

  EdgeFit fit;
  fit.a = theta.head(n).transpose();
  fit.b1 = theta.segment(n, m).transpose();
  fit.b2 = theta(n + m);
  fit.residuals = y - X * theta;
  return fit;
}

std::pair<ContinuousTankModel, std::vector<Vector>> assemble_continuous_model(
    const TrajectoryDataset& data, const std::vector<EdgeFit>& fits) {
  data.validate();
  require(fits.size() == data.edges.size(),
          "assemble_continuous_model: one fit per edge required");
  const int n = data.n();
  const int m = data.m();
  const int S = data.samples();

  // Every tank must have at least one fitted edge and a consistent area.
  std::set<int> tanks_seen;
  std::vector<double> area(n, 0.0);
  for (const auto& e : data.edges) {
    require(e.tank >= 0 && e.tank < n, "assemble_continuous_model: edge tank index out of range");
    if (tanks_seen.count(e.tank)) {
      require(std::abs(area[e.tank] - e.tank_area) < 1e-12,
              "assemble_continuous_model: inconsistent area for tank " + std::to_string(e.tank));
    }
    tanks_seen.insert(e.tank);
    area[e.tank] = e.tank_area;
  }
  for (int j = 0; j < n; ++j) {
    if (!tanks_seen.count(j)) {
      throw ValidationError("assemble_continuous_model: tank " + std::to_string(j) +
                            " has no fitted edges");
    }
  }

  ContinuousTankModel model;
  model.A = Matrix::Zero(n, n);
  model.B1 = Matrix::Zero(n, m);
  model.B2 = Matrix::Zero(n, 1);
  std::vector<Vector> wm(S, Vector::Zero(n));

  for (std::size_t e = 0; e < data.edges.size(); ++e) {
    const int j = data.edges[e].tank;
    const double inv_area = 1.0 / area[j];
    model.A.row(j) += inv_area * fits[e].a;
    model.B1.row(j) += inv_area * fits[e].b1;
    model.B2(j, 0) += inv_area * fits[e].b2;
    require(fits[e].residuals.size() == S,
            "assemble_continuous_model: residual length mismatch for edge " + data.edges[e].id);
    for (int t = 0; t < S; ++t) wm[t](j) += inv_area * fits[e].residuals(t);
  }
  model.validate();
  return {std::move(model), std::move(wm)};
}

LinearTankModel discretize_rk4(const ContinuousTankModel& model, double dt) {
  model.validate();
  if (dt <= 0.0) throw ValidationError("discretize_rk4: dt must be positive");
  const int n = model.n();
  const int m = model.m();

  // Augmented system [A B; 0 0] with B = [B1 B2 I]; one RK4 step of a linear
  // system equals the degree-4 Taylor expansion of the matrix exponential.
  const int p = m + 1 + n;
  Matrix aug = Matrix::Zero(n + p, n + p);
  aug.topLeftCorner(n, n) = model.A;
  aug.block(0, n, n, m) = model.B1;
  aug.block(0, n + m, n, 1) = model.B2;
  aug.block(0, n + m + 1, n, n) = Matrix::Identity(n, n);

  const Matrix x = aug * dt;
  Matrix phi = Matrix::Identity(n + p, n + p);
  Matrix term = Matrix::Identity(n + p, n + p);
  for (int k = 1; k <= 4; ++k) {
    term = (term * x) / static_cast<double>(k);
    phi += term;
  }

  LinearTankModel d;
  d.Ad = phi.topLeftCorner(n, n);
  d.Bd1 = phi.block(0, n, n, m);
  d.Bd2 = phi.block(0, n + m, n, 1);
  d.Bd3 = phi.block(0, n + m + 1, n, n);
  d.dt = dt;
  d.source = model;
  return d;
}

std::vector<Vector> predict_nominal(const LinearTankModel& model, const Vector& h0,
                                    const std::vector<Vector>& v, const Vector& d_bar) {
  model.validate();
  const int N = static_cast<int>(v.size());
  if (d_bar.size() != N) {
    throw ValidationError("predict_nominal: input and demand sequences must have equal length");
  }
  if (h0.size() != model.n()) throw ValidationError("predict_nominal: h0 dimension mismatch");

  std::vector<Vector> out;
  out.reserve(N + 1);
  out.push_back(h0);
  for (int j = 0; j < N; ++j) {
    if (v[j].size() != model.m()) throw ValidationError("predict_nominal: v dimension mismatch");
    out.push_back(model.Ad * out.back() + model.Bd1 * v[j] + model.Bd2 * Vector::Constant(1, d_bar(j)));
  }
  return out;
}

double stage_cost(double price, const Vector& v, const Vector& h_hat,
                  const PumpPressureModel& pressure) {
  if (v.size() != pressure.m() || h_hat.size() != pressure.C.cols()) {
    throw ValidationError("stage_cost: dimension mismatch");
  }
  return price * v.dot(pressure.C * h_hat + pressure.D * v - pressure.p_in);
}

}  // namespace wdn
