#ifndef WDN_SIM_HPP_
#define WDN_SIM_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "wdn/controllers.hpp"

namespace wdn {

struct ScenarioSpec {
  std::string name;
  GeneratorBox box;
  int days = 100;
};

struct StepRecord {
  int hour = 0;
  Vector h;        // state at the start of the step
  Vector u;        // applied input
  Vector g;        // realized generator sample
  Vector w;        // realized disturbance E g
  Vector h_next;   // state after the step
  double price = 0.0;
  double demand = 0.0;
  double cost = 0.0;   // realized stage electricity cost
  double slack = 0.0;  // soft-constraint slack reported by the controller
  bool feasible = false;
  int iterations = 0;
  int violations = 0;  // violated state rows of h_next
};

struct ClosedLoopTrace {
  std::string controller;
  std::string scenario;
  std::uint64_t seed = 0;
  Vector h0;
  std::vector<StepRecord> steps;
  std::vector<double> iter_seconds;  // per-iteration solve times, all steps pooled

  int hours() const { return static_cast<int>(steps.size()); }
  double total_cost() const;
  int total_violations() const;
  int infeasible_steps() const;
};

/// Realized generator sample for a scenario hour.  Depends only on the
/// scenario seed and the hour, so every controller sees the same disturbance
/// sequence and the result is independent of scheduling order.
Vector scenario_generator(const GeneratorBox& box, std::uint64_t scenario_seed, int hour);

ClosedLoopTrace run_closed_loop(const Controller& ctrl, const Vector& h0,
                                const ScenarioSpec& scenario, int hours,
                                std::uint64_t scenario_seed);

/// State-row violations of `h` against the stage constraints, with tolerance.
int count_state_violations(const Vector& h, const ConstraintSpec& spec, double tol = 1e-6);

/// Realized cost per simulated day.  Throws if the trace length is not a
/// whole number of days.
std::vector<double> daily_costs(const ClosedLoopTrace& trace, int hours_per_day = 24);

struct CellSummary {
  std::string controller;
  std::string scenario;
  int hours = 0;
  double total_cost = 0.0;
  double mean_daily_cost = 0.0;
  int violations = 0;
  int infeasible_steps = 0;
  double median_iter_seconds = 0.0;
};

CellSummary summarize(const ClosedLoopTrace& trace, const ConstraintSpec& spec);

/// Runs every (controller, scenario) cell, in parallel across cells when
/// workers > 1.  Results are ordered controller-major regardless of worker
/// count, and each cell's disturbances depend only on (master_seed, scenario
/// index), so summaries are identical for any worker count.
std::vector<CellSummary> run_experiment_matrix(const std::vector<Controller>& controllers,
                                               const std::vector<ScenarioSpec>& scenarios,
                                               const Vector& h0, std::uint64_t master_seed,
                                               int workers,
                                               std::vector<ClosedLoopTrace>* traces = nullptr);

}  // namespace wdn

#endif  // WDN_SIM_HPP_
