#include "wdn/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace wdn {

double ClosedLoopTrace::total_cost() const {
  double c = 0.0;
  for (const StepRecord& r : steps) c += r.cost;
  return c;
}

int ClosedLoopTrace::total_violations() const {
  int v = 0;
  for (const StepRecord& r : steps) v += r.violations;
  return v;
}

int ClosedLoopTrace::infeasible_steps() const {
  int v = 0;
  for (const StepRecord& r : steps) v += r.feasible ? 0 : 1;
  return v;
}

Vector scenario_generator(const GeneratorBox& box, std::uint64_t scenario_seed, int hour) {
  Rng rng(derive_seed(scenario_seed, static_cast<std::uint64_t>(hour)));
  return sample_generator(box, rng);
}

int count_state_violations(const Vector& h, const ConstraintSpec& spec, double tol) {
  int v = 0;
  for (int r : spec.state_rows())
    if (spec.K.row(r).dot(h) - spec.b(r) > tol) ++v;
  return v;
}

ClosedLoopTrace run_closed_loop(const Controller& ctrl, const Vector& h0,
                                const ScenarioSpec& scenario, int hours,
                                std::uint64_t scenario_seed) {
  const SystemSetup& setup = ctrl.setup();
  if (h0.size() != setup.model.n())
    throw ValidationError("closed loop: initial state length mismatch");
  if (hours < 1) throw ValidationError("closed loop: hours must be at least 1");
  if (scenario.box.lo.size() != setup.dist.E.cols() && ctrl.config().kind == ControllerKind::dfmpc)
    throw ValidationError("closed loop: scenario generator dimension mismatch");

  ClosedLoopTrace trace;
  trace.controller = ctrl.name();
  trace.scenario = scenario.name;
  trace.seed = scenario_seed;
  trace.h0 = h0;
  trace.steps.reserve(hours);

  Vector h = h0;
  for (int t = 0; t < hours; ++t) {
    const ControlDecision dec = ctrl.step(h, t);
    const Vector g = scenario_generator(scenario.box, scenario_seed, t);
    const Vector w = setup.dist.E * g;
    const double price = setup.price_window(t, 1)(0);
    const double demand = setup.demand_window(t, 1)(0);

    StepRecord rec;
    rec.hour = t;
    rec.h = h;
    rec.u = dec.u;
    rec.g = g;
    rec.w = w;
    rec.price = price;
    rec.demand = demand;
    rec.cost = stage_cost(price, dec.u, h, setup.pressure);
    rec.slack = dec.max_slack;
    rec.feasible = dec.feasible;
    rec.iterations = dec.report.iterations;
    rec.h_next = setup.model.Ad * h + setup.model.Bd1 * dec.u +
                 setup.model.Bd2 * demand + w;
    rec.violations = count_state_violations(rec.h_next, setup.spec);
    trace.steps.push_back(std::move(rec));
    trace.iter_seconds.insert(trace.iter_seconds.end(), dec.report.iter_seconds.begin(),
                              dec.report.iter_seconds.end());
    h = trace.steps.back().h_next;
  }
  return trace;
}

std::vector<double> daily_costs(const ClosedLoopTrace& trace, int hours_per_day) {
  if (hours_per_day < 1) throw ValidationError("daily costs: hours_per_day must be positive");
  const int hours = trace.hours();
  if (hours % hours_per_day != 0)
    throw ValidationError("daily costs: trace length is not a whole number of days");
  std::vector<double> days(hours / hours_per_day, 0.0);
  for (int t = 0; t < hours; ++t) days[t / hours_per_day] += trace.steps[t].cost;
  return days;
}

CellSummary summarize(const ClosedLoopTrace& trace, const ConstraintSpec& spec) {
  (void)spec;  // violations are recorded against the stage spec per step
  CellSummary cell;
  cell.controller = trace.controller;
  cell.scenario = trace.scenario;
  cell.hours = trace.hours();
  cell.total_cost = trace.total_cost();
  cell.mean_daily_cost =
      trace.hours() > 0 ? trace.total_cost() * 24.0 / trace.hours() : 0.0;
  cell.violations = trace.total_violations();
  cell.infeasible_steps = trace.infeasible_steps();
  std::vector<double> times = trace.iter_seconds;
  if (!times.empty()) {
    std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
    cell.median_iter_seconds = times[times.size() / 2];
  }
  return cell;
}

std::vector<CellSummary> run_experiment_matrix(const std::vector<Controller>& controllers,
                                               const std::vector<ScenarioSpec>& scenarios,
                                               const Vector& h0, std::uint64_t master_seed,
                                               int workers,
                                               std::vector<ClosedLoopTrace>* traces) {
  if (controllers.empty()) throw ValidationError("experiment matrix: no controllers");
  if (scenarios.empty()) throw ValidationError("experiment matrix: no scenarios");
  if (workers < 1) throw ValidationError("experiment matrix: workers must be at least 1");

  const int nc = static_cast<int>(controllers.size());
  const int ns = static_cast<int>(scenarios.size());
  const int ncells = nc * ns;
  std::vector<ClosedLoopTrace> out(ncells);
  std::exception_ptr first_error;
  std::mutex err_mtx;
  std::atomic<int> next{0};

  auto work = [&] {
    for (;;) {
      const int cell = next.fetch_add(1);
      if (cell >= ncells) return;
      const int ci = cell / ns;
      const int si = cell % ns;
      try {
        const ScenarioSpec& sc = scenarios[si];
        // Disturbances depend on the scenario only, never on the controller
        // or the scheduling order.
        const std::uint64_t seed = derive_seed(master_seed, static_cast<std::uint64_t>(si));
        out[cell] = run_closed_loop(controllers[ci], h0, sc, sc.days * 24, seed);
      } catch (...) {
        std::lock_guard<std::mutex> lk(err_mtx);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<CellSummary> cells;
  cells.reserve(ncells);
  for (int cell = 0; cell < ncells; ++cell)
    cells.push_back(summarize(out[cell], controllers[cell / ns].setup().spec));
  if (traces) *traces = std::move(out);
  return cells;
}

}  // namespace wdn
