#ifndef WDN_QP_HPP_
#define WDN_QP_HPP_

#include <utility>
#include <vector>

#include "wdn/types.hpp"

namespace wdn {

/// Canonical convex-QP form:
///   min 0.5 x' H x + q' x + c0
///   s.t. Aeq x = beq,  Ain x <= bin.
struct QpProblem {
  int nvars = 0;
  SpMat H;
  Vector q;
  double c0 = 0.0;
  SpMat Aeq;
  Vector beq;
  SpMat Ain;
  Vector bin;

  void validate() const;
};

enum class SolveStatus { optimal, infeasible, max_iter, numerical };

const char* to_string(SolveStatus s);

struct SolveReport {
  SolveStatus status = SolveStatus::numerical;
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> iter_seconds;  // wall time of each interior-point iteration
  double res_primal = 0.0;
  double res_dual = 0.0;
  double res_comp = 0.0;
  double hessian_shift = 0.0;  // lambda applied by convexify (0 when H was already PD)

  double median_iter_seconds() const;
};

struct IpmOptions {
  double tol = 1e-8;        // absolute KKT tolerance
  double rtol = 1e-8;       // relative KKT tolerance
  int max_iter = 250;
  double reg = 1e-8;        // quasi-definite regularization / convexify epsilon
  bool verbose = false;
  int dense_size_guard = 6000;  // max variable count for the dense reference path
};

/// Smallest shift in {0, eps, 2 eps, 4 eps, ...} such that the Cholesky-type
/// factorization of H + lambda I succeeds with every pivot >= eps.
/// Returns (H + lambda I, lambda).
std::pair<SpMat, double> convexify(const SpMat& H, double eps = 1e-8);

/// Mehrotra predictor-corrector primal-dual interior-point solve using a
/// sparse LDLt factorization of the stage-banded KKT system.  No dense
/// matrix of KKT order is ever formed.
std::pair<Vector, SolveReport> solve_sparse_ipm(const QpProblem& p, const IpmOptions& opts = {});

/// Same interior-point iteration with a generic dense factorization.
/// Size-guarded; intended as the reference/oracle path (and as the
/// deliberately unstructured baseline for complexity measurements).
std::pair<Vector, SolveReport> solve_dense_reference(const QpProblem& p,
                                                     const IpmOptions& opts = {});

}  // namespace wdn

#endif  // WDN_QP_HPP_
