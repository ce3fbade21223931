#ifndef WDN_MODEL_HPP_
#define WDN_MODEL_HPP_

#include <optional>
#include <utility>
#include <vector>

#include "wdn/types.hpp"

namespace wdn {

/// Continuous-time tank level surrogate: dh/dt = A h + B1 u + B2 d_a + w_m.
/// Units: levels in meters, pump flows in L/s, demand in L/s, time in hours.
struct ContinuousTankModel {
  Matrix A;   // n x n
  Matrix B1;  // n x m
  Matrix B2;  // n x 1

  int n() const { return static_cast<int>(A.rows()); }
  int m() const { return static_cast<int>(B1.cols()); }
  void validate() const;
};

/// Discrete-time surrogate obtained by one RK4 step of length dt:
///   h+ = Ad h + Bd1 u + Bd2 d_a + Bd3 w_m.
/// Bd3 is the discretized map of a unit-gain model-error input (the RK4
/// zero-order-hold map with identity continuous input matrix).
struct LinearTankModel {
  Matrix Ad;   // n x n
  Matrix Bd1;  // n x m
  Matrix Bd2;  // n x 1
  Matrix Bd3;  // n x n
  double dt = 1.0;  // hours
  std::optional<ContinuousTankModel> source;

  int n() const { return static_cast<int>(Ad.rows()); }
  int m() const { return static_cast<int>(Bd1.cols()); }
  void validate() const;
};

/// Pump outlet pressure p_out = C h + D u; inlet pressure p_in is constant.
struct PumpPressureModel {
  Matrix C;     // m x n
  Matrix D;     // m x m
  Vector p_in;  // m

  int m() const { return static_cast<int>(D.rows()); }
  int n() const { return static_cast<int>(C.cols()); }
  void validate() const;
};

/// Samples of (h, u, d_a, q) per pipe edge, aligned in time across edges,
/// plus edge metadata.  Edge e's flow at sample t is q(t, e).
struct TrajectoryDataset {
  struct Edge {
    std::string id;
    int tank = 0;       // tank index j the edge feeds
    int neighbor = 0;   // neighbor node index i
    double tank_area = 1.0;
  };

  std::vector<Edge> edges;
  Matrix h;    // S x n
  Matrix u;    // S x m
  Vector d_a;  // S
  Matrix q;    // S x edges.size()

  int samples() const { return static_cast<int>(h.rows()); }
  int n() const { return static_cast<int>(h.cols()); }
  int m() const { return static_cast<int>(u.cols()); }
  void validate() const;
};

/// q = a h + b1 u + b2 d_a + eps for one edge.
struct EdgeFit {
  RowVector a;       // 1 x n
  RowVector b1;      // 1 x m
  double b2 = 0.0;
  Vector residuals;  // per-row eps
};

/// Ordinary least-squares fit of one edge's flow surrogate.
/// Throws ValidationError on an empty/underdetermined dataset and
/// SolverError (naming the edge) on a rank-deficient regressor.
EdgeFit fit_edge_surrogate(const TrajectoryDataset& data, int edge);

/// Assembles the vector-form continuous model from per-edge fits:
/// row j of A is (1/A_j) * sum of a over edges feeding tank j, and the
/// same structure for B1, B2.  Also returns the model-error samples
/// w_m(t), with entry j equal to (1/A_j) * sum of edge residuals at t.
std::pair<ContinuousTankModel, std::vector<Vector>> assemble_continuous_model(
    const TrajectoryDataset& data, const std::vector<EdgeFit>& fits);

/// Discretizes with one fourth-order Runge-Kutta step, holding u and d_a
/// constant over the step.  For the linear model this is the degree-4
/// Taylor map of the augmented matrix [A B; 0 0]:
///   Ad = I + A dt + (A dt)^2/2 + (A dt)^3/6 + (A dt)^4/24.
LinearTankModel discretize_rk4(const ContinuousTankModel& model, double dt);

/// Disturbance-free prediction: returns N+1 states starting at h0 with
/// h_{j+1} = Ad h_j + Bd1 v_j + Bd2 d_bar_j.
std::vector<Vector> predict_nominal(const LinearTankModel& model, const Vector& h0,
                                    const std::vector<Vector>& v, const Vector& d_bar);

/// Electricity cost of one stage: e * v' (C h_hat + D v - p_in).
double stage_cost(double price, const Vector& v, const Vector& h_hat,
                  const PumpPressureModel& pressure);

}  // namespace wdn

#endif  // WDN_MODEL_HPP_
