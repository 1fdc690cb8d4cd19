#include "epiident/sir.hpp"

#include <algorithm>
#include <cmath>

namespace epiident {

namespace {

// Observation times must sit on the integrator's step grid.
long long steps_for(double from, double to, double dt, const char* what) {
  const double raw = (to - from) / dt;
  const long long n = std::llround(raw);
  if (std::abs(raw - static_cast<double>(n)) > 1e-6)
    throw std::invalid_argument(std::string(what) + " is not a multiple of the integrator step");
  return n;
}

}  // namespace

SirSolution integrate_sir(const EpidemicParameters& params, const StateVector& initial,
                          const TimeGrid& grid, double dt) {
  params.validate();
  grid.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("integrator step must be positive");

  SirSolution out;
  const long long total_steps = steps_for(grid.t_start, grid.t_end, dt, "integration span");
  out.dense_times.reserve(total_steps + 1);
  out.dense_states.reserve(total_steps + 1);
  out.trajectory.grid = grid;
  out.trajectory.kind = TrajectoryKind::ode;
  out.trajectory.prevalence.reserve(grid.size());

  double s = initial.susceptible, i = initial.infectious, r = initial.recovered;
  std::size_t next_obs = 0;
  for (long long step = 0; step <= total_steps; ++step) {
    const double t = grid.t_start + static_cast<double>(step) * dt;
    if (step > 0) {
      sir_rk4_step(params, dt, s, i, r);
      sir_check_state(t, s, i, r);
    }
    out.dense_times.push_back(t);
    out.dense_states.push_back({s, i, r});
    if (next_obs < grid.times.size() &&
        std::abs(t - grid.times[next_obs]) < std::min(1e-6, 0.5 * dt)) {
      out.trajectory.prevalence.push_back(i);
      ++next_obs;
    }
  }
  if (next_obs != grid.times.size())
    throw std::invalid_argument("observation times do not lie on the integrator step grid");
  return out;
}

StateVector integrate_to_quiescence(const EpidemicParameters& params, const StateVector& initial,
                                    double dt, double max_t) {
  params.validate();
  double s = initial.susceptible, i = initial.infectious, r = initial.recovered;
  double t = 0.0;
  while (i >= 0.5 && t < max_t) {
    sir_rk4_step(params, dt, s, i, r);
    t += dt;
    sir_check_state(t, s, i, r);
  }
  return {s, i, r};
}

double basic_reproduction_number(const EpidemicParameters& params) {
  params.validate();
  return params.beta * params.population / params.alpha;
}

Peak peak_of(const Trajectory& traj) {
  if (traj.prevalence.empty()) throw std::invalid_argument("peak of an empty trajectory");
  std::size_t best = 0;
  for (std::size_t k = 1; k < traj.prevalence.size(); ++k)
    if (traj.prevalence[k] > traj.prevalence[best]) best = k;
  if (traj.prevalence[best] <= 0.0) throw NoPeakError();
  return {traj.grid.times[best], traj.prevalence[best]};
}

double sse_objective(const EpidemicParameters& params, const StateVector& initial,
                     const Trajectory& data, double dt) {
  params.validate();
  const TimeGrid& grid = data.grid;
  if (data.prevalence.size() != grid.times.size())
    throw std::invalid_argument("data length does not match its grid");

  double s = initial.susceptible, i = initial.infectious, r = initial.recovered;
  double sse = 0.0;
  std::size_t next_obs = 0;
  const long long total_steps = steps_for(grid.t_start, grid.t_end, dt, "integration span");
  for (long long step = 0; step <= total_steps; ++step) {
    const double t = grid.t_start + static_cast<double>(step) * dt;
    if (step > 0) {
      sir_rk4_step(params, dt, s, i, r);
      sir_check_state(t, s, i, r);
    }
    if (next_obs < grid.times.size() &&
        std::abs(t - grid.times[next_obs]) < std::min(1e-6, 0.5 * dt)) {
      const double d = i - data.prevalence[next_obs];
      sse += d * d;
      ++next_obs;
    }
  }
  if (next_obs != grid.times.size())
    throw std::invalid_argument("observation times do not lie on the integrator step grid");
  return sse;
}

}  // namespace epiident
