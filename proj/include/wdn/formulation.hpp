#ifndef WDN_FORMULATION_HPP_
#define WDN_FORMULATION_HPP_

#include <vector>

#include "wdn/model.hpp"
#include "wdn/qp.hpp"
#include "wdn/uncertainty.hpp"

namespace wdn {

/// Stage constraints K h + L u <= b and terminal constraint Kh h <= bh.
/// The box constructor produces the block pattern
///   h <= h_max, -h <= -h_min, u <= u_max, -u <= 0   (s = 2n + 2m rows).
struct ConstraintSpec {
  Matrix K;   // s x n
  Matrix L;   // s x m
  Vector b;   // s
  Matrix Kh;  // 2n x n
  Vector bh;  // 2n

  int n() const { return static_cast<int>(K.cols()); }
  int m() const { return static_cast<int>(L.cols()); }
  int s() const { return static_cast<int>(K.rows()); }

  void validate() const;

  static ConstraintSpec box(const Vector& h_min, const Vector& h_max, const Vector& u_max);

  /// Rows with a zero input block (pure state constraints).
  std::vector<int> state_rows() const;

  /// State bounds shrunk by `margin` on every pure-state row (stage and
  /// terminal): b_r -= |K_r| margin.  Input rows are untouched.
  /// Throws ValidationError if the tightened state box is empty.
  ConstraintSpec tightened(const Vector& margin) const;
};

/// Disturbance-feedback policy in U-form: u_j = v_j + sum_k U_{j,k} g_k,
/// with U = M J strictly lower block triangular (m x l blocks).
struct AffinePolicy {
  Matrix U;  // mN x lN
  Vector v;  // mN
  int N = 0;
  int m = 0;
  int l = 0;

  Vector v_at(int j) const { return v.segment(static_cast<Eigen::Index>(j) * m, m); }

  /// Input at stage j given the realized generator history g_0..g_{j-1}.
  Vector input_at(int j, const std::vector<Vector>& g_hist) const;

  /// Recovers M from U = M (I kron E) blockwise; requires square invertible E.
  Matrix feedback_gain(const Matrix& E) const;
};

/// Stacked prediction system over horizon N:
///   h_stack = A_st h + B1_st u + B2_st d_bar + Bw_st w,
/// with the block constraint map K_st and generator map J = I kron E.
struct StackedSystem {
  LinearTankModel model;
  ConstraintSpec spec;
  DisturbanceSet dist;
  int N = 0;

  Matrix Astack;   // n(N+1) x n,    block j = Ad^j
  Matrix B1stack;  // n(N+1) x mN
  Matrix B2stack;  // n(N+1) x N
  Matrix Bwstack;  // n(N+1) x nN
  Matrix Kstack;   // (sN+2n) x n(N+1)
  SpMat J;         // nN x lN

  int n = 0, m = 0, l = 0, s = 0;
  int rows() const { return s * N + 2 * n; }  // sN + 2n
};

StackedSystem build_stacked(const LinearTankModel& model, const ConstraintSpec& spec,
                            const DisturbanceSet& dist, int N);

/// Exact quadratic expansion of the horizon electricity cost in the stacked
/// nominal input vector v, after substituting the nominal dynamics:
///   J = 0.5 v' H v + q' v + c0.
struct QuadraticCost {
  Matrix H;  // mN x mN
  Vector q;  // mN
  double c0 = 0.0;
};

QuadraticCost cost_terms(const StackedSystem& st, const PumpPressureModel& pressure,
                         const Vector& prices, const Vector& d_bar, const Vector& h);

/// Dense tractable robust counterpart: decision variables (v, U, Lambda) with
///   F v + Lambda 1 <= c - K_st B2_st d_bar + T h,
///   -Lambda <= F U + G J <= Lambda,
/// where F = K_st B1_st + [I kron L; 0], G = K_st Bw_st, T = -K_st A_st and
/// c = [1 kron b; bh].
struct DenseRobustProgram {
  Matrix F, G, T;
  Vector c;
  Vector ctilde;  // c - K_st B2_st d_bar + T h
  Matrix GJ;
  QpProblem qp;

  int n = 0, m = 0, l = 0, s = 0, N = 0;
  int R = 0;  // constraint rows sN + 2n
  int P = 0;  // generator columns lN

  // variable layout: [v | U column-major free entries | Lambda row-major]
  std::vector<int> ucol_offset;  // per column p
  int lam_offset = 0;
  int lam_index(int r, int p) const { return lam_offset + r * P + p; }

  Vector extract_v(const Vector& x) const;
  Matrix extract_U(const Vector& x) const;
  Matrix extract_Lambda(const Vector& x) const;
  AffinePolicy extract_policy(const Vector& x) const;
};

DenseRobustProgram build_dense(const StackedSystem& st, const Vector& h, const Vector& d_bar,
                               const QuadraticCost& cost);

/// Sparse equivalent built from a nominal subsystem plus one subsystem per
/// generator column.  Column p (0-based) activates at stage k+1 with
/// k = p / l and starts from column z = p mod l of E.  Variables are ordered
/// stage by stage so the KKT system is block banded.
struct SparseRobustProgram {
  QpProblem qp;
  int n = 0, m = 0, l = 0, s = 0, N = 0;
  int P = 0;       // number of subsystems, lN
  bool soft = false;
  double rho = 0.0;
  std::vector<int> state_row_idx;  // soft-eligible stage rows

  std::vector<int> hhat_off;             // j = 0..N
  std::vector<int> v_off;                // j = 0..N-1
  std::vector<std::vector<int>> hp_off;  // [p][j], -1 when absent
  std::vector<std::vector<int>> up_off;  // [p][j], -1 when absent
  std::vector<std::vector<int>> dc_off;  // [p][j], -1 when absent
  std::vector<int> slack_off;            // j = 0..N, -1 when absent

  int k_of(int p) const { return p / l; }
  int z_of(int p) const { return p % l; }

  Vector extract_v(const Vector& x) const;
  std::vector<Vector> extract_nominal_states(const Vector& x) const;
  AffinePolicy extract_policy(const Vector& x) const;
  /// Column p of Lambda reconstructed from the subsystem bound variables.
  Vector extract_delta_c(const Vector& x, int p) const;
  double max_slack(const Vector& x) const;
};

SparseRobustProgram build_sparse(const StackedSystem& st, const Vector& h, const Vector& d_bar,
                                 const QuadraticCost& cost, bool soft = false, double rho = 0.0);

}  // namespace wdn

#endif  // WDN_FORMULATION_HPP_
