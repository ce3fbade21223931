#ifndef WDN_UNCERTAINTY_HPP_
#define WDN_UNCERTAINTY_HPP_

#include <vector>

#include "wdn/types.hpp"

namespace wdn {

/// Bounded disturbance set W = { E g : ||g||_inf <= 1 }.
/// l = 0 (no generator columns) encodes the singleton {0}.
struct DisturbanceSet {
  Matrix E;  // n x l

  int n() const { return static_cast<int>(E.rows()); }
  int l() const { return static_cast<int>(E.cols()); }

  static DisturbanceSet zero(int n) { return DisturbanceSet{Matrix::Zero(n, 0)}; }
  static DisturbanceSet diagonal(const Vector& radii);

  bool is_diagonal(double tol = 0.0) const;

  /// Membership test.  Exact elementwise check when E is diagonal; for a
  /// general generator matrix an LP (min ||g||_inf s.t. E g = w) is solved.
  bool contains(const Vector& w, double tol = 1e-8) const;
};

/// Scalar demand uncertainty W_d = { e_d g : |g| <= 1 }.
struct ScalarDemandSet {
  double e_d = 0.0;
  void validate() const {
    if (e_d < 0.0) throw ValidationError("ScalarDemandSet: e_d must be nonnegative");
  }
};

/// Per-coordinate sampling intervals for the disturbance generator, each a
/// subinterval of [-1, 1].  Encodes the experiment difficulty levels
/// (normal, challenging, extreme).
struct GeneratorBox {
  Vector lo;
  Vector hi;

  int l() const { return static_cast<int>(lo.size()); }
  void validate() const;

  static GeneratorBox normal(int l);                      // [-1,1]^l
  static GeneratorBox challenging();                      // [-1,-0.5] x [0.5,1]
  static GeneratorBox extreme();                          // {-1} x {1}
};

enum class CombineMode { exact, box };

/// E = diag of elementwise maxima of |samples|; the smallest diagonal set
/// containing every sample.
DisturbanceSet quantify_from_residuals(const std::vector<Vector>& samples);

/// Combined set W with Bd2 W_d + Bd3 W_m contained in W.
/// exact: generator concatenation E = [Bd2 e_d | Bd3 Em]  (Minkowski sum).
/// box:   diagonal interval overapproximation, l = n.
DisturbanceSet combine_sets(const DisturbanceSet& model_set, const ScalarDemandSet& demand_set,
                            const Matrix& Bd2, const Matrix& Bd3, CombineMode mode);

/// Uniform sample from the generator box; deterministic for a fixed Rng state.
Vector sample_generator(const GeneratorBox& box, Rng& rng);

/// w'_k = sum_j |E_kj|: the elementwise maximum possible disturbance
/// (zonotope support along each coordinate axis).
Vector elementwise_max_disturbance(const DisturbanceSet& set);

}  // namespace wdn

#endif  // WDN_UNCERTAINTY_HPP_
