#ifndef WDN_CONTROLLERS_HPP_
#define WDN_CONTROLLERS_HPP_

#include <memory>
#include <string>
#include <vector>

#include "wdn/formulation.hpp"

namespace wdn {

/// Everything a controller needs that does not change between steps.
struct SystemSetup {
  LinearTankModel model;
  ConstraintSpec spec;
  PumpPressureModel pressure;
  DisturbanceSet dist;
  Vector prices;  // one electricity price per hour, repeated cyclically
  Vector demand;  // one nominal demand per hour, repeated cyclically

  void validate() const;
  /// Horizon-length slice starting at absolute hour t, wrapping cyclically.
  Vector price_window(int t, int N) const;
  Vector demand_window(int t, int N) const;
};

enum class ControllerKind { dfmpc, nominal, tightened };

std::string to_string(ControllerKind kind);
ControllerKind controller_kind_from_string(const std::string& name);

struct ControllerConfig {
  ControllerKind kind = ControllerKind::dfmpc;
  int N = 24;
  double tighten_k = 1.0;  // only for ControllerKind::tightened
  bool soft = true;
  double rho = 1e4;
  IpmOptions solver;
};

struct ControlDecision {
  Vector u;             // applied (clamped) first input
  Vector v;             // planned nominal input sequence, mN
  AffinePolicy policy;  // zero feedback for nominal / tightened controllers
  SolveReport report;
  double max_slack = 0.0;
  bool feasible = false;  // hard-feasible (slack below tolerance)
};

/// One receding-horizon controller.  step() solves the stage problem for the
/// current state and hour and returns the input to apply.
class Controller {
 public:
  Controller(SystemSetup setup, ControllerConfig config);

  ControlDecision step(const Vector& h, int hour) const;

  const SystemSetup& setup() const { return setup_; }
  const ControllerConfig& config() const { return config_; }
  std::string name() const;

 private:
  ControlDecision solve_robust(const Vector& h, int hour) const;
  ControlDecision solve_certainty(const Vector& h, int hour, const ConstraintSpec& spec) const;

  SystemSetup setup_;
  ControllerConfig config_;
  ConstraintSpec tightened_spec_;  // precomputed for tightened controllers
};

/// Clamps pump flows to the physical range [0, u_max] read off the spec rows.
Vector clamp_input(const Vector& u, const ConstraintSpec& spec);

}  // namespace wdn

#endif  // WDN_CONTROLLERS_HPP_
