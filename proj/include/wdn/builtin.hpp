#ifndef WDN_BUILTIN_HPP_
#define WDN_BUILTIN_HPP_

#include "wdn/controllers.hpp"
#include "wdn/sim.hpp"

namespace wdn::builtin {

/// Identified two-tank network (hourly discretization).  The continuous
/// source model is recovered from the discrete one: A from the principal
/// matrix logarithm of Ad, B1 and B2 by inverting the degree-4 input map, so
/// re-discretizing the source reproduces the discrete matrices.
LinearTankModel two_tank_model();

/// Model-error disturbance bounds: w in E [-1,1]^2 with E = diag(0.054, 0.083)
/// meters per hour.
DisturbanceSet two_tank_uncertainty();

/// Level bounds (half-full to full) and per-pump flow caps.
ConstraintSpec two_tank_constraints();

/// Affine pump pressure map p_out = C h + D u with constant inlet pressure.
/// The default is diagonally dominant in D, which keeps the electricity cost
/// convex in the pump flows.
PumpPressureModel two_tank_pressure();

/// Day/night electricity tariff (24 hourly values, cheap 22:00-06:00).
Vector day_night_prices();

/// Diurnal nominal demand profile (24 hourly values, L/s).
Vector diurnal_demand();

/// Full closed-loop setup combining the pieces above.
SystemSetup two_tank_setup();

/// Disturbance scenarios: generators drawn from [-1,1]^2 (normal), from
/// [-1,-0.5] x [0.5,1] (challenging) or pinned at (-1, 1) (extreme).
ScenarioSpec normal_scenario(int days = 100);
ScenarioSpec challenging_scenario(int days = 100);
ScenarioSpec extreme_scenario(int days = 10);

/// Principal real logarithm of a square matrix with positive real
/// eigenvalues (used to recover the continuous drift from Ad).
Matrix real_matrix_log(const Matrix& M);

}  // namespace wdn::builtin

#endif  // WDN_BUILTIN_HPP_
