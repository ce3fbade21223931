#include "wdn/controllers.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace wdn {

namespace {

constexpr double kSlackTol = 1e-6;

}  // namespace

void SystemSetup::validate() const {
  model.validate();
  spec.validate();
  pressure.validate();
  if (spec.n() != model.n() || spec.m() != model.m())
    throw ValidationError("system setup: constraint dimensions do not match the model");
  if (pressure.n() != model.n() || pressure.m() != model.m())
    throw ValidationError("system setup: pressure dimensions do not match the model");
  if (dist.E.rows() != model.n())
    throw ValidationError("system setup: disturbance set dimension mismatch");
  if (prices.size() < 1) throw ValidationError("system setup: price profile is empty");
  if (demand.size() < 1) throw ValidationError("system setup: demand profile is empty");
  if ((prices.array() < 0).any())
    throw ValidationError("system setup: prices must be nonnegative");
  if ((demand.array() < 0).any())
    throw ValidationError("system setup: demand must be nonnegative");
}

Vector SystemSetup::price_window(int t, int N) const {
  if (t < 0 || N < 1) throw ValidationError("price window: bad arguments");
  const int len = static_cast<int>(prices.size());
  Vector w(N);
  for (int j = 0; j < N; ++j) w(j) = prices((t + j) % len);
  return w;
}

Vector SystemSetup::demand_window(int t, int N) const {
  if (t < 0 || N < 1) throw ValidationError("demand window: bad arguments");
  const int len = static_cast<int>(demand.size());
  Vector w(N);
  for (int j = 0; j < N; ++j) w(j) = demand((t + j) % len);
  return w;
}

std::string to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::dfmpc:
      return "dfmpc";
    case ControllerKind::nominal:
      return "nompc";
    case ControllerKind::tightened:
      return "ctmpc";
  }
  throw ValidationError("unknown controller kind");
}

ControllerKind controller_kind_from_string(const std::string& name) {
  if (name == "dfmpc") return ControllerKind::dfmpc;
  if (name == "nompc" || name == "nominal") return ControllerKind::nominal;
  if (name == "ctmpc" || name == "tightened") return ControllerKind::tightened;
  throw ValidationError("unknown controller kind '" + name + "'");
}

Vector clamp_input(const Vector& u, const ConstraintSpec& spec) {
  const int m = spec.m();
  if (u.size() != m) throw ValidationError("clamp input: length mismatch");
  Vector lo = Vector::Constant(m, -std::numeric_limits<double>::infinity());
  Vector hi = Vector::Constant(m, std::numeric_limits<double>::infinity());
  for (int r = 0; r < spec.s(); ++r) {
    if (!spec.K.row(r).isZero(0.0)) continue;
    // Pure input row; only single-coordinate rows define a clamp range.
    int idx = -1;
    bool single = true;
    for (int i = 0; i < m; ++i)
      if (spec.L(r, i) != 0.0) {
        if (idx >= 0) single = false;
        idx = i;
      }
    if (!single || idx < 0) continue;
    const double c = spec.L(r, idx);
    if (c > 0)
      hi(idx) = std::min(hi(idx), spec.b(r) / c);
    else
      lo(idx) = std::max(lo(idx), spec.b(r) / c);
  }
  return u.cwiseMax(lo).cwiseMin(hi);
}

Controller::Controller(SystemSetup setup, ControllerConfig config)
    : setup_(std::move(setup)), config_(std::move(config)) {
  setup_.validate();
  if (config_.N < 1) throw ValidationError("controller: horizon must be at least 1");
  if (config_.soft && config_.rho <= 0)
    throw ValidationError("controller: soft penalty must be positive");
  if (config_.kind == ControllerKind::tightened) {
    if (config_.tighten_k <= 0)
      throw ValidationError("controller: tightening factor must be positive");
    const Vector margin = config_.tighten_k * elementwise_max_disturbance(setup_.dist);
    tightened_spec_ = setup_.spec.tightened(margin);  // throws if the box collapses
  }
}

std::string Controller::name() const {
  if (config_.kind != ControllerKind::tightened) return to_string(config_.kind);
  std::ostringstream os;
  os << "ctmpc-k" << config_.tighten_k;
  return os.str();
}

ControlDecision Controller::step(const Vector& h, int hour) const {
  if (h.size() != setup_.model.n()) throw ValidationError("controller step: state length mismatch");
  if (hour < 0) throw ValidationError("controller step: hour must be nonnegative");
  switch (config_.kind) {
    case ControllerKind::dfmpc:
      return solve_robust(h, hour);
    case ControllerKind::nominal:
      return solve_certainty(h, hour, setup_.spec);
    case ControllerKind::tightened:
      return solve_certainty(h, hour, tightened_spec_);
  }
  throw ValidationError("controller step: unknown kind");
}

ControlDecision Controller::solve_robust(const Vector& h, int hour) const {
  const int N = config_.N;
  const StackedSystem st = build_stacked(setup_.model, setup_.spec, setup_.dist, N);
  const Vector prices = setup_.price_window(hour, N);
  const Vector d_bar = setup_.demand_window(hour, N);
  const QuadraticCost cost = cost_terms(st, setup_.pressure, prices, d_bar, h);
  const SparseRobustProgram sp =
      build_sparse(st, h, d_bar, cost, config_.soft, config_.rho);

  ControlDecision dec;
  auto [x, report] = solve_sparse_ipm(sp.qp, config_.solver);
  dec.report = report;
  dec.policy = sp.extract_policy(x);
  dec.v = dec.policy.v;
  dec.max_slack = sp.max_slack(x);
  dec.feasible = dec.report.status == SolveStatus::optimal && dec.max_slack <= kSlackTol;
  dec.u = clamp_input(dec.policy.v_at(0), setup_.spec);
  return dec;
}

ControlDecision Controller::solve_certainty(const Vector& h, int hour,
                                            const ConstraintSpec& spec) const {
  const int N = config_.N;
  // Zero-column generator matrix: no subsystems, plain nominal program.
  const StackedSystem st = build_stacked(setup_.model, spec,
                                         DisturbanceSet::zero(setup_.model.n()), N);
  const Vector prices = setup_.price_window(hour, N);
  const Vector d_bar = setup_.demand_window(hour, N);
  const QuadraticCost cost = cost_terms(st, setup_.pressure, prices, d_bar, h);
  const SparseRobustProgram sp =
      build_sparse(st, h, d_bar, cost, config_.soft, config_.rho);

  ControlDecision dec;
  auto [x, report] = solve_sparse_ipm(sp.qp, config_.solver);
  dec.report = report;
  dec.policy = sp.extract_policy(x);
  dec.v = dec.policy.v;
  dec.max_slack = sp.max_slack(x);
  dec.feasible = dec.report.status == SolveStatus::optimal && dec.max_slack <= kSlackTol;
  // Physical clamp uses the untightened pump range.
  dec.u = clamp_input(dec.policy.v_at(0), setup_.spec);
  return dec;
}

}  // namespace wdn
