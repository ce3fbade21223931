#include "wdn/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace wdn {

void QpProblem::validate() const {
  if (H.rows() != nvars || H.cols() != nvars) throw ValidationError("QpProblem: H size mismatch");
  if (q.size() != nvars) throw ValidationError("QpProblem: q size mismatch");
  if (Aeq.cols() != nvars || Aeq.rows() != beq.size()) {
    throw ValidationError("QpProblem: equality block size mismatch");
  }
  if (Ain.cols() != nvars || Ain.rows() != bin.size()) {
    throw ValidationError("QpProblem: inequality block size mismatch");
  }
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::numerical: return "numerical";
  }
  return "unknown";
}

double SolveReport::median_iter_seconds() const {
  if (iter_seconds.empty()) return 0.0;
  std::vector<double> t = iter_seconds;
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

std::pair<SpMat, double> convexify(const SpMat& H, double eps) {
  const int n = static_cast<int>(H.rows());
  if (n == 0) return {H, 0.0};
  SpMat eye(n, n);
  eye.setIdentity();

  auto pivots_ok = [&](const SpMat& M) {
    Eigen::SimplicialLDLT<SpMat> ldlt(M);
    if (ldlt.info() != Eigen::Success) return false;
    const Vector d = ldlt.vectorD();
    return d.allFinite() && d.minCoeff() >= eps;
  };

  double lambda = 0.0;
  if (pivots_ok(H)) return {H, 0.0};
  lambda = eps;
  for (int k = 0; k < 80; ++k) {
    SpMat shifted = H + lambda * eye;
    if (pivots_ok(shifted)) return {shifted, lambda};
    lambda *= 2.0;
  }
  throw SolverError("convexify: no positive definite shift found");
}

namespace {

// Solves the Newton system
//   [Hs+rI  Aeq'  Ain' ] [dx]   [r1]
//   [Aeq   -rI    0    ] [dy] = [r2]          W = z ./ s
//   [Ain    0   -1/W-rI] [dz]   [r3]
// behind a backend-specific factorization.
class KktSolver {
 public:
  KktSolver(const SpMat& Hs, const SpMat& Aeq, const SpMat& Ain)
      : Hs_(Hs), Aeq_(Aeq), Ain_(Ain), nv_(static_cast<int>(Hs.rows())),
        ne_(static_cast<int>(Aeq.rows())), mi_(static_cast<int>(Ain.rows())) {}
  virtual ~KktSolver() = default;
  virtual bool factorize(const Vector& w, double reg) = 0;
  virtual void raw_solve(const Vector& r1, const Vector& r2, const Vector& r3, Vector& dx,
                         Vector& dy, Vector& dz) = 0;

  // One factorized solve plus iterative refinement against the unregularized
  // system; the regularization shift is only a factorization crutch.
  void solve(const Vector& r1, const Vector& r2, const Vector& r3, Vector& dx, Vector& dy,
             Vector& dz) {
    raw_solve(r1, r2, r3, dx, dy, dz);
    for (int pass = 0; pass < 2; ++pass) {
      Vector e1 = r1 - Hs_ * dx - Aeq_.transpose() * dy - Ain_.transpose() * dz;
      Vector e2 = r2 - Aeq_ * dx;
      Vector e3 = r3 - Ain_ * dx + dz.cwiseQuotient(w_);
      const double res = std::max({e1.size() ? e1.lpNorm<Eigen::Infinity>() : 0.0,
                                   e2.size() ? e2.lpNorm<Eigen::Infinity>() : 0.0,
                                   e3.size() ? e3.lpNorm<Eigen::Infinity>() : 0.0});
      const double scale = 1.0 + std::max({r1.lpNorm<Eigen::Infinity>(),
                                           r2.size() ? r2.lpNorm<Eigen::Infinity>() : 0.0,
                                           r3.size() ? r3.lpNorm<Eigen::Infinity>() : 0.0});
      if (!(res > 1e-13 * scale) || !e1.allFinite() || !e3.allFinite()) break;
      Vector cx, cy, cz;
      raw_solve(e1, e2, e3, cx, cy, cz);
      if (!cx.allFinite()) break;
      dx += cx;
      dy += cy;
      dz += cz;
    }
  }

 protected:
  const SpMat& Hs_;
  const SpMat& Aeq_;
  const SpMat& Ain_;
  Vector w_;
  int nv_, ne_, mi_;
};

// Sparse backend keeps the inequality duals in the system: with convexified
// Hs the matrix is quasi-definite, so the pivot-free sparse LDLT succeeds and
// the factorization cost tracks the fill of the constraint structure instead
// of the dense normal-equations fill.
class SparseKkt final : public KktSolver {
 public:
  using KktSolver::KktSolver;

  bool factorize(const Vector& w, double reg) override {
    w_ = w;
    const int dim = nv_ + ne_ + mi_;
    std::vector<Triplet> trips;
    trips.reserve(Hs_.nonZeros() + 2 * (Aeq_.nonZeros() + Ain_.nonZeros()) + dim);
    for (int c = 0; c < Hs_.outerSize(); ++c)
      for (SpMat::InnerIterator it(Hs_, c); it; ++it)
        trips.emplace_back(static_cast<int>(it.row()), c, it.value());
    for (int i = 0; i < nv_; ++i) trips.emplace_back(i, i, reg);
    for (int c = 0; c < Aeq_.outerSize(); ++c)
      for (SpMat::InnerIterator it(Aeq_, c); it; ++it) {
        trips.emplace_back(nv_ + static_cast<int>(it.row()), c, it.value());
        trips.emplace_back(c, nv_ + static_cast<int>(it.row()), it.value());
      }
    for (int i = 0; i < ne_; ++i) trips.emplace_back(nv_ + i, nv_ + i, -reg);
    for (int c = 0; c < Ain_.outerSize(); ++c)
      for (SpMat::InnerIterator it(Ain_, c); it; ++it) {
        trips.emplace_back(nv_ + ne_ + static_cast<int>(it.row()), c, it.value());
        trips.emplace_back(c, nv_ + ne_ + static_cast<int>(it.row()), it.value());
      }
    for (int i = 0; i < mi_; ++i)
      trips.emplace_back(nv_ + ne_ + i, nv_ + ne_ + i, -1.0 / w(i) - reg);

    SpMat K(dim, dim);
    K.setFromTriplets(trips.begin(), trips.end());
    if (!analyzed_) {
      ldlt_.analyzePattern(K);
      analyzed_ = true;
    }
    ldlt_.factorize(K);
    if (ldlt_.info() != Eigen::Success) {
      analyzed_ = false;  // pattern may need a fresh analysis after a retry
      return false;
    }
    return true;
  }

  void raw_solve(const Vector& r1, const Vector& r2, const Vector& r3, Vector& dx, Vector& dy,
                 Vector& dz) override {
    Vector rhs(nv_ + ne_ + mi_);
    rhs.head(nv_) = r1;
    rhs.segment(nv_, ne_) = r2;
    rhs.tail(mi_) = r3;
    Vector sol = ldlt_.solve(rhs);
    dx = sol.head(nv_);
    dy = sol.segment(nv_, ne_);
    dz = sol.tail(mi_);
  }

 private:
  bool analyzed_ = false;
  Eigen::SimplicialLDLT<SpMat> ldlt_;
};

// Dense reference backend: partial-pivot LU of the full augmented system.
// No condensation, so it stays accurate under extreme centrality scaling.
class DenseKkt final : public KktSolver {
 public:
  DenseKkt(const SpMat& Hs, const SpMat& Aeq, const SpMat& Ain)
      : KktSolver(Hs, Aeq, Ain), Hd_(Matrix(Hs)), Aeqd_(Matrix(Aeq)), Aind_(Matrix(Ain)) {}

  bool factorize(const Vector& w, double reg) override {
    w_ = w;
    const int dim = nv_ + ne_ + mi_;
    Matrix K = Matrix::Zero(dim, dim);
    K.topLeftCorner(nv_, nv_) = Hd_;
    K.topLeftCorner(nv_, nv_).diagonal().array() += reg;
    K.block(0, nv_, nv_, ne_) = Aeqd_.transpose();
    K.block(nv_, 0, ne_, nv_) = Aeqd_;
    K.block(nv_, nv_, ne_, ne_).diagonal().setConstant(-reg);
    K.block(0, nv_ + ne_, nv_, mi_) = Aind_.transpose();
    K.block(nv_ + ne_, 0, mi_, nv_) = Aind_;
    K.block(nv_ + ne_, nv_ + ne_, mi_, mi_).diagonal() = -w.cwiseInverse().array() - reg;
    lu_.compute(K);
    return lu_.matrixLU().diagonal().allFinite() &&
           lu_.matrixLU().diagonal().cwiseAbs().minCoeff() > 0.0;
  }

  void raw_solve(const Vector& r1, const Vector& r2, const Vector& r3, Vector& dx, Vector& dy,
                 Vector& dz) override {
    Vector rhs(nv_ + ne_ + mi_);
    rhs.head(nv_) = r1;
    rhs.segment(nv_, ne_) = r2;
    rhs.tail(mi_) = r3;
    Vector sol = lu_.solve(rhs);
    dx = sol.head(nv_);
    dy = sol.segment(nv_, ne_);
    dz = sol.tail(mi_);
  }

 private:
  Matrix Hd_, Aeqd_, Aind_;
  Eigen::PartialPivLU<Matrix> lu_;
};

double max_step(const Vector& v, const Vector& dv) {
  double alpha = 1.0;
  for (int i = 0; i < v.size(); ++i) {
    if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
  }
  return alpha;
}

std::pair<Vector, SolveReport> run_ipm(const QpProblem& p, const IpmOptions& opts,
                                       KktSolver& kkt, double hessian_shift, const SpMat& Hs) {
  using clock = std::chrono::steady_clock;
  const int nv = p.nvars;
  const int ne = static_cast<int>(p.Aeq.rows());
  const int mi = static_cast<int>(p.Ain.rows());

  SolveReport rep;
  rep.hessian_shift = hessian_shift;

  Vector x = Vector::Zero(nv);
  Vector y = Vector::Zero(ne);
  // Strictly interior start: slack = max(1, distance to bound).
  Vector s = (p.bin - p.Ain * x).cwiseMax(1.0);
  Vector z = Vector::Ones(mi);

  const double scale_d = 1.0 + p.q.lpNorm<Eigen::Infinity>();
  const double scale_p = 1.0 + std::max(ne > 0 ? p.beq.lpNorm<Eigen::Infinity>() : 0.0,
                                        mi > 0 ? p.bin.lpNorm<Eigen::Infinity>() : 0.0);

  auto objective = [&](const Vector& xx) {
    return 0.5 * xx.dot(p.H * xx) + p.q.dot(xx) + p.c0;
  };

  int stalls = 0;
  for (int it = 0; it < opts.max_iter; ++it) {
    const auto t0 = clock::now();

    Vector rd = Hs * x + p.q + p.Aeq.transpose() * y + p.Ain.transpose() * z;
    Vector rp = p.Aeq * x - p.beq;
    Vector rg = p.Ain * x + s - p.bin;
    const double mu = mi > 0 ? s.dot(z) / mi : 0.0;

    rep.res_dual = rd.size() ? rd.lpNorm<Eigen::Infinity>() : 0.0;
    rep.res_primal = std::max(ne ? rp.lpNorm<Eigen::Infinity>() : 0.0,
                              mi ? rg.lpNorm<Eigen::Infinity>() : 0.0);
    rep.res_comp = mu;
    rep.iterations = it;

    const double tol_d = opts.tol + opts.rtol * scale_d;
    const double tol_p = opts.tol + opts.rtol * scale_p;
    const double tol_mu = opts.tol + opts.rtol * (1.0 + std::abs(objective(x)));
    if (rep.res_dual <= tol_d && rep.res_primal <= tol_p && mu <= tol_mu) {
      rep.status = SolveStatus::optimal;
      rep.objective = objective(x);
      return {x, rep};
    }
    if (!x.allFinite() || !s.allFinite() || !z.allFinite()) {
      rep.status = SolveStatus::numerical;
      rep.objective = objective(x);
      return {x, rep};
    }
    if (z.lpNorm<Eigen::Infinity>() + (ne ? y.lpNorm<Eigen::Infinity>() : 0.0) > 1e13 * scale_d) {
      rep.status = SolveStatus::infeasible;  // dual divergence
      rep.objective = objective(x);
      return {x, rep};
    }

    Vector w = z.cwiseQuotient(s);
    double reg = opts.reg;
    bool ok = false;
    for (int attempt = 0; attempt < 6 && !ok; ++attempt) {
      ok = kkt.factorize(w, reg);
      if (!ok) reg *= 100.0;
    }
    if (!ok) {
      rep.status = SolveStatus::numerical;
      rep.objective = objective(x);
      return {x, rep};
    }

    // Predictor (affine scaling direction).
    Vector rc = s.cwiseProduct(z);
    const Vector r1 = -rd;
    const Vector r2 = -rp;
    Vector r3 = -rg + rc.cwiseQuotient(z);
    Vector dx, dy, dz;
    kkt.solve(r1, r2, r3, dx, dy, dz);
    Vector ds = -(rc + s.cwiseProduct(dz)).cwiseQuotient(z);

    const double ap_aff = max_step(s, ds);
    const double ad_aff = max_step(z, dz);
    const double mu_aff =
        mi > 0 ? (s + ap_aff * ds).dot(z + ad_aff * dz) / mi : 0.0;
    const double sigma = mu > 0 ? std::pow(mu_aff / mu, 3.0) : 0.0;

    // Corrector with Mehrotra centering.
    rc = s.cwiseProduct(z) + ds.cwiseProduct(dz) - Vector::Constant(mi, sigma * mu);
    r3 = -rg + rc.cwiseQuotient(z);
    kkt.solve(r1, r2, r3, dx, dy, dz);
    ds = -(rc + s.cwiseProduct(dz)).cwiseQuotient(z);

    const double tau = 0.995;
    const double ap = std::min(1.0, tau * max_step(s, ds));
    const double ad = std::min(1.0, tau * max_step(z, dz));

    x += ap * dx;
    s += ap * ds;
    y += ad * dy;
    z += ad * dz;

    rep.iter_seconds.push_back(std::chrono::duration<double>(clock::now() - t0).count());
    rep.iterations = it + 1;

    if (ap < 1e-9 && ad < 1e-9) {
      if (++stalls >= 3) break;
    } else {
      stalls = 0;
    }
  }

  rep.objective = objective(x);
  // On exhaustion: a stubborn primal residual with tiny complementarity is the
  // practical signature of infeasibility for these programs.
  if (rep.res_primal > 1e3 * (opts.tol + opts.rtol * scale_p) &&
      rep.res_comp < 1e-4 * (1.0 + std::abs(rep.objective))) {
    rep.status = SolveStatus::infeasible;
  } else if (rep.iterations >= opts.max_iter) {
    rep.status = SolveStatus::max_iter;
  } else {
    rep.status = SolveStatus::infeasible;
  }
  return {x, rep};
}

}  // namespace

namespace {

// Normalizes the objective magnitude (convexified first, so the shift stays
// proportionate), runs the IPM, and restores the reported objective scale.
template <typename Backend>
std::pair<Vector, SolveReport> scaled_solve(const QpProblem& p, const IpmOptions& opts) {
  auto [Hshift, shift] = convexify(p.H, opts.reg);
  const double sc = 1.0 + p.q.lpNorm<Eigen::Infinity>();
  QpProblem ps = p;
  ps.H = p.H / sc;  // objective evaluation stays shift-free
  ps.q = p.q / sc;
  ps.c0 = p.c0 / sc;
  const SpMat Hss = Hshift / sc;
  Backend kkt(Hss, ps.Aeq, ps.Ain);
  auto [x, rep] = run_ipm(ps, opts, kkt, shift, Hss);
  rep.objective *= sc;
  rep.res_dual *= sc;
  return {std::move(x), rep};
}

}  // namespace

std::pair<Vector, SolveReport> solve_sparse_ipm(const QpProblem& p, const IpmOptions& opts) {
  p.validate();
  if (p.nvars == 0) {
    SolveReport rep;
    rep.status = SolveStatus::optimal;
    rep.objective = p.c0;
    return {Vector::Zero(0), rep};
  }
  return scaled_solve<SparseKkt>(p, opts);
}

std::pair<Vector, SolveReport> solve_dense_reference(const QpProblem& p, const IpmOptions& opts) {
  p.validate();
  if (p.nvars == 0) {
    SolveReport rep;
    rep.status = SolveStatus::optimal;
    rep.objective = p.c0;
    return {Vector::Zero(0), rep};
  }
  const auto kkt_dim = p.nvars + p.Aeq.rows() + p.Ain.rows();
  if (kkt_dim > opts.dense_size_guard) {
    throw SolverError("solve_dense_reference: problem exceeds dense size guard (" +
                      std::to_string(kkt_dim) + " > " + std::to_string(opts.dense_size_guard) +
                      ")");
  }
  return scaled_solve<DenseKkt>(p, opts);
}

}  // namespace wdn
