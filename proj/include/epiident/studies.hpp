#pragma once

#include <utility>
#include <vector>

#include "epiident/rng.hpp"
#include "epiident/sir.hpp"
#include "epiident/types.hpp"

namespace epiident {

/// Hypothetical intervention: beta drops by `reduction` at the intervention
/// time and stays reduced to the horizon.
struct ControlScenario {
  EpidemicParameters base;
  double reduction = 0.60;
  double intervention_time = 7.0;  // days
  double horizon = 150.0;          // days

  void validate() const;
};

/// Cumulative incidence N - S(t) on the base trajectory's grid.
Trajectory cumulative_incidence(const SirSolution& sol);

struct CloudConfig {
  int starts = 300;
  double sse_band_factor = 1.1;  // "similarly good fit" acceptance band
  // Random log-space start box.
  double alpha_lo = 0.03, alpha_hi = 0.6;
  double beta_lo = 5e-5, beta_hi = 5e-3;
  double population = 0.0;
  StateVector initial;
  int threads = 0;
};

/// Multi-start fits against cumulative incidence data; keeps the `count`
/// best fits whose SSE sits within the acceptance band of the overall best.
std::vector<std::pair<double, double>> fit_cloud_to_incidence(const Trajectory& data, int count,
                                                              RngSeed seed,
                                                              const CloudConfig& config);

struct ControlProjection {
  std::vector<double> final_cumulative;  // per cloud member, persons at horizon
  int excluded = 0;
};

ControlProjection project_control(const std::vector<std::pair<double, double>>& cloud,
                                  const ControlScenario& scenario, const StateVector& initial);

struct RegistrationResult {
  std::vector<Trajectory> aligned;
  Trajectory registered_mean;
  Trajectory unaligned_mean;
  double rmse_registered = 0.0;  // vs ODE, on the common overlap window
  double rmse_unaligned = 0.0;
  int skipped = 0;  // no-takeoff runs
};

/// Landmark registration: time-shift each took-off run so its smoothed peak
/// lands on the ODE peak time, then average pointwise.
RegistrationResult register_at_peak(const std::vector<Trajectory>& ensemble, const Trajectory& ode);

}  // namespace epiident
