#include "wdn/formulation.hpp"

#include <cmath>
#include <string>
#include <unordered_set>

namespace wdn {

namespace {

constexpr double kDrop = 1e-14;  // triplet magnitude below which entries are skipped

void push_dense_block(std::vector<Triplet>& trips, int row0, int col0, const Matrix& blk,
                      double scale = 1.0) {
  for (int c = 0; c < blk.cols(); ++c)
    for (int r = 0; r < blk.rows(); ++r) {
      const double v = scale * blk(r, c);
      if (std::abs(v) > kDrop) trips.emplace_back(row0 + r, col0 + c, v);
    }
}

void push_identity(std::vector<Triplet>& trips, int row0, int col0, int k, double scale = 1.0) {
  for (int i = 0; i < k; ++i) trips.emplace_back(row0 + i, col0 + i, scale);
}

}  // namespace

void ConstraintSpec::validate() const {
  if (K.rows() == 0 || K.cols() == 0) throw ValidationError("constraint spec: empty state block");
  if (L.rows() != K.rows()) throw ValidationError("constraint spec: K and L row mismatch");
  if (b.size() != K.rows()) throw ValidationError("constraint spec: b length mismatch");
  if (Kh.cols() != K.cols()) throw ValidationError("constraint spec: terminal column mismatch");
  if (bh.size() != Kh.rows()) throw ValidationError("constraint spec: bh length mismatch");
}

ConstraintSpec ConstraintSpec::box(const Vector& h_min, const Vector& h_max, const Vector& u_max) {
  const int n = static_cast<int>(h_min.size());
  const int m = static_cast<int>(u_max.size());
  if (h_max.size() != n) throw ValidationError("constraint box: h_min and h_max length mismatch");
  if (((h_max - h_min).array() <= 0).any())
    throw ValidationError("constraint box: h_max must exceed h_min elementwise");
  if ((u_max.array() <= 0).any())
    throw ValidationError("constraint box: u_max must be positive");

  ConstraintSpec cs;
  const int s = 2 * n + 2 * m;
  cs.K = Matrix::Zero(s, n);
  cs.L = Matrix::Zero(s, m);
  cs.b = Vector::Zero(s);
  cs.K.topRows(n).setIdentity();
  cs.K.block(n, 0, n, n) = -Matrix::Identity(n, n);
  cs.L.block(2 * n, 0, m, m).setIdentity();
  cs.L.block(2 * n + m, 0, m, m) = -Matrix::Identity(m, m);
  cs.b.head(n) = h_max;
  cs.b.segment(n, n) = -h_min;
  cs.b.segment(2 * n, m) = u_max;

  cs.Kh = Matrix::Zero(2 * n, n);
  cs.Kh.topRows(n).setIdentity();
  cs.Kh.bottomRows(n) = -Matrix::Identity(n, n);
  cs.bh = Vector::Zero(2 * n);
  cs.bh.head(n) = h_max;
  cs.bh.tail(n) = -h_min;
  return cs;
}

std::vector<int> ConstraintSpec::state_rows() const {
  std::vector<int> rows;
  for (int r = 0; r < s(); ++r)
    if (L.row(r).isZero(0.0) && !K.row(r).isZero(0.0)) rows.push_back(r);
  return rows;
}

ConstraintSpec ConstraintSpec::tightened(const Vector& margin) const {
  validate();
  if (margin.size() != n()) throw ValidationError("tightened: margin length mismatch");
  if ((margin.array() < 0).any()) throw ValidationError("tightened: margin must be nonnegative");
  ConstraintSpec out = *this;
  for (int r : state_rows()) out.b(r) -= K.row(r).cwiseAbs().dot(margin);
  for (int r = 0; r < static_cast<int>(Kh.rows()); ++r)
    out.bh(r) -= Kh.row(r).cwiseAbs().dot(margin);

  // Detect an empty state box for the +/- identity pattern produced by box().
  for (int i = 0; i < n(); ++i) {
    double hi = std::numeric_limits<double>::infinity();
    double lo = -std::numeric_limits<double>::infinity();
    for (int r : out.state_rows()) {
      if (out.K(r, i) > 0.5 && out.K.row(r).cwiseAbs().sum() == out.K(r, i))
        hi = std::min(hi, out.b(r) / out.K(r, i));
      if (out.K(r, i) < -0.5 && out.K.row(r).cwiseAbs().sum() == -out.K(r, i))
        lo = std::max(lo, out.b(r) / out.K(r, i));
    }
    if (lo > hi)
      throw ValidationError("tightened: state bounds cross for coordinate " + std::to_string(i));
  }
  return out;
}

Vector AffinePolicy::input_at(int j, const std::vector<Vector>& g_hist) const {
  if (j < 0 || j >= N) throw ValidationError("policy input: stage out of range");
  if (static_cast<int>(g_hist.size()) < j)
    throw ValidationError("policy input: generator history too short");
  Vector u = v_at(j);
  for (int k = 0; k < j; ++k) {
    if (g_hist[k].size() != l) throw ValidationError("policy input: generator length mismatch");
    u += U.block(static_cast<Eigen::Index>(j) * m, static_cast<Eigen::Index>(k) * l, m, l) *
         g_hist[k];
  }
  return u;
}

Matrix AffinePolicy::feedback_gain(const Matrix& E) const {
  if (E.rows() != E.cols() || E.rows() != l)
    throw ValidationError("feedback gain: requires a square generator matrix");
  Eigen::FullPivLU<Matrix> lu(E);
  if (!lu.isInvertible()) throw ValidationError("feedback gain: generator matrix is singular");
  const Matrix Einv = lu.inverse();
  Matrix M = Matrix::Zero(U.rows(), U.cols());
  for (int j = 0; j < N; ++j)
    for (int k = 0; k < j; ++k)
      M.block(static_cast<Eigen::Index>(j) * m, static_cast<Eigen::Index>(k) * l, m, l) =
          U.block(static_cast<Eigen::Index>(j) * m, static_cast<Eigen::Index>(k) * l, m, l) * Einv;
  return M;
}

StackedSystem build_stacked(const LinearTankModel& model, const ConstraintSpec& spec,
                            const DisturbanceSet& dist, int N) {
  model.validate();
  spec.validate();
  if (N < 1) throw ValidationError("stacked system: horizon must be at least 1");
  if (spec.n() != model.n() || spec.m() != model.m())
    throw ValidationError("stacked system: constraint dimensions do not match the model");
  if (dist.E.rows() != model.n())
    throw ValidationError("stacked system: disturbance set dimension mismatch");

  StackedSystem st;
  st.model = model;
  st.spec = spec;
  st.dist = dist;
  st.N = N;
  st.n = model.n();
  st.m = model.m();
  st.l = static_cast<int>(dist.E.cols());
  st.s = spec.s();
  const int n = st.n, m = st.m, l = st.l, s = st.s;

  std::vector<Matrix> Apow(N + 1);
  Apow[0] = Matrix::Identity(n, n);
  for (int j = 1; j <= N; ++j) Apow[j] = model.Ad * Apow[j - 1];

  st.Astack = Matrix::Zero(static_cast<Eigen::Index>(n) * (N + 1), n);
  st.B1stack = Matrix::Zero(static_cast<Eigen::Index>(n) * (N + 1), static_cast<Eigen::Index>(m) * N);
  st.B2stack = Matrix::Zero(static_cast<Eigen::Index>(n) * (N + 1), N);
  st.Bwstack = Matrix::Zero(static_cast<Eigen::Index>(n) * (N + 1), static_cast<Eigen::Index>(n) * N);
  for (int j = 0; j <= N; ++j) {
    st.Astack.block(static_cast<Eigen::Index>(j) * n, 0, n, n) = Apow[j];
    for (int k = 0; k < j; ++k) {
      st.B1stack.block(static_cast<Eigen::Index>(j) * n, static_cast<Eigen::Index>(k) * m, n, m) =
          Apow[j - 1 - k] * model.Bd1;
      st.B2stack.block(static_cast<Eigen::Index>(j) * n, k, n, 1) = Apow[j - 1 - k] * model.Bd2;
      st.Bwstack.block(static_cast<Eigen::Index>(j) * n, static_cast<Eigen::Index>(k) * n, n, n) =
          Apow[j - 1 - k];
    }
  }

  st.Kstack = Matrix::Zero(st.rows(), static_cast<Eigen::Index>(n) * (N + 1));
  for (int j = 0; j < N; ++j)
    st.Kstack.block(static_cast<Eigen::Index>(j) * s, static_cast<Eigen::Index>(j) * n, s, n) =
        spec.K;
  st.Kstack.block(static_cast<Eigen::Index>(s) * N, static_cast<Eigen::Index>(n) * N, 2 * n, n) =
      spec.Kh;

  std::vector<Triplet> jt;
  for (int k = 0; k < N; ++k)
    for (int c = 0; c < l; ++c)
      for (int r = 0; r < n; ++r)
        if (std::abs(dist.E(r, c)) > kDrop)
          jt.emplace_back(k * n + r, k * l + c, dist.E(r, c));
  st.J = SpMat(static_cast<Eigen::Index>(n) * N, static_cast<Eigen::Index>(l) * N);
  st.J.setFromTriplets(jt.begin(), jt.end());
  return st;
}

QuadraticCost cost_terms(const StackedSystem& st, const PumpPressureModel& pressure,
                         const Vector& prices, const Vector& d_bar, const Vector& h) {
  pressure.validate();
  if (pressure.n() != st.n || pressure.m() != st.m)
    throw ValidationError("cost terms: pressure model dimension mismatch");
  if (prices.size() != st.N) throw ValidationError("cost terms: price vector length mismatch");
  if (d_bar.size() != st.N) throw ValidationError("cost terms: demand vector length mismatch");
  if (h.size() != st.n) throw ValidationError("cost terms: state length mismatch");

  const int n = st.n, m = st.m, N = st.N;
  // Stage states 0..N-1 only enter the cost.
  const Matrix Sh = st.Astack.topRows(static_cast<Eigen::Index>(n) * N);
  const Matrix Sb1 = st.B1stack.topRows(static_cast<Eigen::Index>(n) * N);
  const Matrix Sb2 = st.B2stack.topRows(static_cast<Eigen::Index>(n) * N);

  Matrix Ce = Matrix::Zero(static_cast<Eigen::Index>(m) * N, static_cast<Eigen::Index>(n) * N);
  Matrix De = Matrix::Zero(static_cast<Eigen::Index>(m) * N, static_cast<Eigen::Index>(m) * N);
  Vector pin = Vector::Zero(static_cast<Eigen::Index>(m) * N);
  for (int j = 0; j < N; ++j) {
    Ce.block(static_cast<Eigen::Index>(j) * m, static_cast<Eigen::Index>(j) * n, m, n) =
        prices(j) * pressure.C;
    De.block(static_cast<Eigen::Index>(j) * m, static_cast<Eigen::Index>(j) * m, m, m) =
        prices(j) * pressure.D;
    pin.segment(static_cast<Eigen::Index>(j) * m, m) = prices(j) * pressure.p_in;
  }

  const Matrix CS = Ce * Sb1;
  QuadraticCost cost;
  cost.H = CS + CS.transpose() + De + De.transpose();
  cost.q = Ce * (Sh * h + Sb2 * d_bar) - pin;
  cost.c0 = 0.0;
  return cost;
}

DenseRobustProgram build_dense(const StackedSystem& st, const Vector& h, const Vector& d_bar,
                               const QuadraticCost& cost) {
  if (h.size() != st.n) throw ValidationError("dense program: state length mismatch");
  if (d_bar.size() != st.N) throw ValidationError("dense program: demand length mismatch");
  const int n = st.n, m = st.m, l = st.l, s = st.s, N = st.N;
  const int R = st.rows();
  const int P = l * N;
  const int mN = m * N;
  if (cost.H.rows() != mN || cost.q.size() != mN)
    throw ValidationError("dense program: cost dimension mismatch");

  DenseRobustProgram dp;
  dp.n = n;
  dp.m = m;
  dp.l = l;
  dp.s = s;
  dp.N = N;
  dp.R = R;
  dp.P = P;

  Matrix Lkron = Matrix::Zero(R, mN);
  for (int j = 0; j < N; ++j)
    Lkron.block(static_cast<Eigen::Index>(j) * s, static_cast<Eigen::Index>(j) * m, s, m) =
        st.spec.L;
  dp.F = st.Kstack * st.B1stack + Lkron;
  dp.G = st.Kstack * st.Bwstack;
  dp.T = -st.Kstack * st.Astack;
  dp.c = Vector::Zero(R);
  for (int j = 0; j < N; ++j) dp.c.segment(static_cast<Eigen::Index>(j) * s, s) = st.spec.b;
  dp.c.tail(2 * n) = st.spec.bh;
  dp.ctilde = dp.c - st.Kstack * (st.B2stack * d_bar) + dp.T * h;
  dp.GJ = dp.G * Matrix(st.J);

  // Variable layout: v, then the free (strictly lower) entries of each U
  // column, then Lambda row-major.
  int off = mN;
  dp.ucol_offset.assign(P, -1);
  for (int p = 0; p < P; ++p) {
    dp.ucol_offset[p] = off;
    const int k = p / l;
    off += m * std::max(0, N - 1 - k);  // stages k+1..N-1
  }
  dp.lam_offset = off;
  const int nvars = off + R * P;

  QpProblem& qp = dp.qp;
  qp.nvars = nvars;
  qp.c0 = cost.c0;
  qp.q = Vector::Zero(nvars);
  qp.q.head(mN) = cost.q;
  std::vector<Triplet> ht;
  push_dense_block(ht, 0, 0, cost.H);
  qp.H = SpMat(nvars, nvars);
  qp.H.setFromTriplets(ht.begin(), ht.end());
  qp.Aeq = SpMat(0, nvars);
  qp.beq = Vector::Zero(0);

  const int nineq = R + 2 * R * P;
  std::vector<Triplet> at;
  qp.bin = Vector::Zero(nineq);

  // F v + Lambda 1 <= ctilde
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < mN; ++c)
      if (std::abs(dp.F(r, c)) > kDrop) at.emplace_back(r, c, dp.F(r, c));
    for (int p = 0; p < P; ++p) at.emplace_back(r, dp.lam_index(r, p), 1.0);
    qp.bin(r) = dp.ctilde(r);
  }

  // -Lambda <= F U + G J <= Lambda, entrywise over (r, p).
  int row = R;
  for (int p = 0; p < P; ++p) {
    const int k = p / l;
    for (int r = 0; r < R; ++r) {
      for (int sign = 0; sign < 2; ++sign) {
        const double sg = sign == 0 ? 1.0 : -1.0;
        for (int j = k + 1; j < N; ++j)
          for (int rr = 0; rr < m; ++rr) {
            const double coef = sg * dp.F(r, j * m + rr);
            if (std::abs(coef) > kDrop)
              at.emplace_back(row, dp.ucol_offset[p] + (j - k - 1) * m + rr, coef);
          }
        at.emplace_back(row, dp.lam_index(r, p), -1.0);
        qp.bin(row) = -sg * dp.GJ(r, p);
        ++row;
      }
    }
  }
  qp.Ain = SpMat(nineq, nvars);
  qp.Ain.setFromTriplets(at.begin(), at.end());
  qp.validate();
  return dp;
}

Vector DenseRobustProgram::extract_v(const Vector& x) const { return x.head(m * N); }

Matrix DenseRobustProgram::extract_U(const Vector& x) const {
  Matrix U = Matrix::Zero(static_cast<Eigen::Index>(m) * N, static_cast<Eigen::Index>(l) * N);
  for (int p = 0; p < P; ++p) {
    const int k = p / l;
    for (int j = k + 1; j < N; ++j)
      for (int rr = 0; rr < m; ++rr)
        U(static_cast<Eigen::Index>(j) * m + rr, p) = x(ucol_offset[p] + (j - k - 1) * m + rr);
  }
  return U;
}

Matrix DenseRobustProgram::extract_Lambda(const Vector& x) const {
  Matrix Lam(R, P);
  for (int r = 0; r < R; ++r)
    for (int p = 0; p < P; ++p) Lam(r, p) = x(lam_index(r, p));
  return Lam;
}

AffinePolicy DenseRobustProgram::extract_policy(const Vector& x) const {
  AffinePolicy pol;
  pol.N = N;
  pol.m = m;
  pol.l = l;
  pol.v = extract_v(x);
  pol.U = extract_U(x);
  return pol;
}

SparseRobustProgram build_sparse(const StackedSystem& st, const Vector& h, const Vector& d_bar,
                                 const QuadraticCost& cost, bool soft, double rho) {
  if (h.size() != st.n) throw ValidationError("sparse program: state length mismatch");
  if (d_bar.size() != st.N) throw ValidationError("sparse program: demand length mismatch");
  if (soft && rho <= 0) throw ValidationError("sparse program: soft penalty must be positive");
  const int n = st.n, m = st.m, l = st.l, s = st.s, N = st.N;
  const int mN = m * N;
  if (cost.H.rows() != mN || cost.q.size() != mN)
    throw ValidationError("sparse program: cost dimension mismatch");

  SparseRobustProgram sp;
  sp.n = n;
  sp.m = m;
  sp.l = l;
  sp.s = s;
  sp.N = N;
  sp.P = l * N;
  sp.soft = soft;
  sp.rho = rho;
  sp.state_row_idx = st.spec.state_rows();
  const int P = sp.P;
  const int nsr = static_cast<int>(sp.state_row_idx.size());

  sp.hhat_off.assign(N + 1, -1);
  sp.v_off.assign(N, -1);
  sp.hp_off.assign(P, std::vector<int>(N + 1, -1));
  sp.up_off.assign(P, std::vector<int>(N, -1));
  sp.dc_off.assign(P, std::vector<int>(N + 1, -1));
  sp.slack_off.assign(N + 1, -1);

  // Stage-major variable walk keeps the KKT fill banded.
  int off = 0;
  for (int j = 0; j <= N; ++j) {
    sp.hhat_off[j] = off;
    off += n;
    if (j < N) {
      sp.v_off[j] = off;
      off += m;
    }
    for (int p = 0; p < P; ++p) {
      const int k = p / l;
      if (j < k + 1) continue;
      sp.hp_off[p][j] = off;
      off += n;
      if (j < N) {
        sp.up_off[p][j] = off;
        off += m;
      }
      sp.dc_off[p][j] = off;
      off += (j < N) ? s : 2 * n;
    }
    if (soft) {
      const int cnt = (j < N) ? nsr : 2 * n;
      if (cnt > 0) {
        sp.slack_off[j] = off;
        off += cnt;
      }
    }
  }
  const int nvars = off;

  QpProblem& qp = sp.qp;
  qp.nvars = nvars;
  qp.c0 = cost.c0;
  qp.q = Vector::Zero(nvars);
  for (int j = 0; j < N; ++j)
    qp.q.segment(sp.v_off[j], m) = cost.q.segment(static_cast<Eigen::Index>(j) * m, m);
  if (soft)
    for (int j = 0; j <= N; ++j)
      if (sp.slack_off[j] >= 0) {
        const int cnt = (j < N) ? nsr : 2 * n;
        qp.q.segment(sp.slack_off[j], cnt).array() += rho;
      }

  std::vector<Triplet> ht;
  for (int ji = 0; ji < N; ++ji)
    for (int jj = 0; jj < N; ++jj)
      push_dense_block(ht, sp.v_off[ji], sp.v_off[jj],
                       cost.H.block(static_cast<Eigen::Index>(ji) * m,
                                    static_cast<Eigen::Index>(jj) * m, m, m));
  qp.H = SpMat(nvars, nvars);
  qp.H.setFromTriplets(ht.begin(), ht.end());

  // Equalities: initial state, nominal dynamics, subsystem seeds and dynamics.
  int neq = n + n * N;
  for (int p = 0; p < P; ++p) {
    const int k = p / l;
    neq += n;                  // seed h^p_{k+1} = E e_z
    neq += n * (N - 1 - k);    // dynamics for j = k+1..N-1
  }
  std::vector<Triplet> et;
  Vector beq = Vector::Zero(neq);
  int erow = 0;
  push_identity(et, erow, sp.hhat_off[0], n);
  beq.segment(erow, n) = h;
  erow += n;
  for (int j = 0; j < N; ++j) {
    push_identity(et, erow, sp.hhat_off[j + 1], n);
    push_dense_block(et, erow, sp.hhat_off[j], st.model.Ad, -1.0);
    push_dense_block(et, erow, sp.v_off[j], st.model.Bd1, -1.0);
    beq.segment(erow, n) = st.model.Bd2 * d_bar(j);
    erow += n;
  }
  for (int p = 0; p < P; ++p) {
    const int k = p / l;
    const int z = p % l;
    push_identity(et, erow, sp.hp_off[p][k + 1], n);
    beq.segment(erow, n) = st.dist.E.col(z);
    erow += n;
    for (int j = k + 1; j < N; ++j) {
      push_identity(et, erow, sp.hp_off[p][j + 1], n);
      push_dense_block(et, erow, sp.hp_off[p][j], st.model.Ad, -1.0);
      push_dense_block(et, erow, sp.up_off[p][j], st.model.Bd1, -1.0);
      erow += 1 * n;
    }
  }
  qp.Aeq = SpMat(neq, nvars);
  qp.Aeq.setFromTriplets(et.begin(), et.end());
  qp.beq = beq;

  // Inequalities: nominal stage and terminal rows inflated by the summed
  // subsystem bounds, subsystem absolute-value rows, slack nonnegativity.
  int nineq = s * N + 2 * n;
  for (int p = 0; p < P; ++p) {
    const int k = p / l;
    nineq += 2 * s * (N - 1 - k) + 2 * (2 * n);
  }
  if (soft) nineq += nsr * N + 2 * n;
  std::vector<Triplet> at;
  Vector bin = Vector::Zero(nineq);
  int row = 0;
  for (int j = 0; j < N; ++j) {
    push_dense_block(at, row, sp.hhat_off[j], st.spec.K);
    push_dense_block(at, row, sp.v_off[j], st.spec.L);
    for (int p = 0; p < P; ++p)
      if (sp.dc_off[p][j] >= 0) push_identity(at, row, sp.dc_off[p][j], s);
    if (soft && sp.slack_off[j] >= 0)
      for (int i = 0; i < nsr; ++i)
        at.emplace_back(row + sp.state_row_idx[i], sp.slack_off[j] + i, -1.0);
    bin.segment(row, s) = st.spec.b;
    row += s;
  }
  push_dense_block(at, row, sp.hhat_off[N], st.spec.Kh);
  for (int p = 0; p < P; ++p) push_identity(at, row, sp.dc_off[p][N], 2 * n);
  if (soft && sp.slack_off[N] >= 0) push_identity(at, row, sp.slack_off[N], 2 * n, -1.0);
  bin.segment(row, 2 * n) = st.spec.bh;
  row += 2 * n;

  for (int p = 0; p < P; ++p) {
    const int k = p / l;
    for (int j = k + 1; j < N; ++j)
      for (int sign = 0; sign < 2; ++sign) {
        const double sg = sign == 0 ? 1.0 : -1.0;
        push_dense_block(at, row, sp.hp_off[p][j], st.spec.K, sg);
        push_dense_block(at, row, sp.up_off[p][j], st.spec.L, sg);
        push_identity(at, row, sp.dc_off[p][j], s, -1.0);
        row += s;
      }
    for (int sign = 0; sign < 2; ++sign) {
      const double sg = sign == 0 ? 1.0 : -1.0;
      push_dense_block(at, row, sp.hp_off[p][N], st.spec.Kh, sg);
      push_identity(at, row, sp.dc_off[p][N], 2 * n, -1.0);
      row += 2 * n;
    }
  }
  if (soft)
    for (int j = 0; j <= N; ++j)
      if (sp.slack_off[j] >= 0) {
        const int cnt = (j < N) ? nsr : 2 * n;
        push_identity(at, row, sp.slack_off[j], cnt, -1.0);
        row += cnt;
      }
  if (row != nineq) throw SolverError("sparse program: inequality row accounting error");
  qp.Ain = SpMat(nineq, nvars);
  qp.Ain.setFromTriplets(at.begin(), at.end());
  qp.bin = bin;
  qp.validate();
  return sp;
}

Vector SparseRobustProgram::extract_v(const Vector& x) const {
  Vector v(static_cast<Eigen::Index>(m) * N);
  for (int j = 0; j < N; ++j) v.segment(static_cast<Eigen::Index>(j) * m, m) = x.segment(v_off[j], m);
  return v;
}

std::vector<Vector> SparseRobustProgram::extract_nominal_states(const Vector& x) const {
  std::vector<Vector> hs(N + 1);
  for (int j = 0; j <= N; ++j) hs[j] = x.segment(hhat_off[j], n);
  return hs;
}

AffinePolicy SparseRobustProgram::extract_policy(const Vector& x) const {
  AffinePolicy pol;
  pol.N = N;
  pol.m = m;
  pol.l = l;
  pol.v = extract_v(x);
  pol.U = Matrix::Zero(static_cast<Eigen::Index>(m) * N, static_cast<Eigen::Index>(l) * N);
  for (int p = 0; p < P; ++p)
    for (int j = 0; j < N; ++j)
      if (up_off[p][j] >= 0)
        pol.U.block(static_cast<Eigen::Index>(j) * m, p, m, 1) = x.segment(up_off[p][j], m);
  return pol;
}

Vector SparseRobustProgram::extract_delta_c(const Vector& x, int p) const {
  if (p < 0 || p >= P) throw ValidationError("delta_c: subsystem index out of range");
  Vector dc = Vector::Zero(static_cast<Eigen::Index>(s) * N + 2 * n);
  for (int j = 0; j < N; ++j)
    if (dc_off[p][j] >= 0) dc.segment(static_cast<Eigen::Index>(j) * s, s) = x.segment(dc_off[p][j], s);
  dc.tail(2 * n) = x.segment(dc_off[p][N], 2 * n);
  return dc;
}

double SparseRobustProgram::max_slack(const Vector& x) const {
  if (!soft) return 0.0;
  double mx = 0.0;
  const int nsr = static_cast<int>(state_row_idx.size());
  for (int j = 0; j <= N; ++j)
    if (slack_off[j] >= 0) {
      const int cnt = (j < N) ? nsr : 2 * n;
      mx = std::max(mx, x.segment(slack_off[j], cnt).maxCoeff());
    }
  return mx;
}

}  // namespace wdn
