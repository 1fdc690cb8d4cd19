#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "epiident/types.hpp"

namespace epiident {

inline constexpr double kDefaultStep = 0.05;       // days
inline constexpr double kDefaultHorizon = 150.0;   // days
inline constexpr double kNegativeClamp = -1e-12;   // round-off tolerance

/// One fixed RK4 step of the SIR system. Kept in the header so that the
/// integrator and the least-squares objective run identical arithmetic.
inline void sir_rk4_step(const EpidemicParameters& p, double dt, double& s, double& i, double& r) {
  const double a = p.alpha, b = p.beta;
  const double k1s = -b * s * i, k1i = b * s * i - a * i, k1r = a * i;
  const double s2 = s + 0.5 * dt * k1s, i2 = i + 0.5 * dt * k1i;
  const double k2s = -b * s2 * i2, k2i = b * s2 * i2 - a * i2, k2r = a * i2;
  const double s3 = s + 0.5 * dt * k2s, i3 = i + 0.5 * dt * k2i;
  const double k3s = -b * s3 * i3, k3i = b * s3 * i3 - a * i3, k3r = a * i3;
  const double s4 = s + dt * k3s, i4 = i + dt * k3i;
  const double k4s = -b * s4 * i4, k4i = b * s4 * i4 - a * i4, k4r = a * i4;
  s += dt / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
  i += dt / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
  r += dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
}

/// Clamp round-off negatives to zero; anything below kNegativeClamp is a
/// genuine blow-up and raises IntegrationFailure.
inline void sir_check_state(double t, double& s, double& i, double& r) {
  if (!std::isfinite(s) || !std::isfinite(i) || !std::isfinite(r))
    throw IntegrationFailure(t, "non-finite state");
  for (double* x : {&s, &i, &r}) {
    if (*x < 0.0) {
      if (*x > kNegativeClamp)
        *x = 0.0;
      else
        throw IntegrationFailure(t, "state went negative beyond round-off");
    }
  }
}

/// Full integration output: prevalence on the observation grid plus the dense
/// step-level solution (used by warp interpolation and peak refinement).
struct SirSolution {
  Trajectory trajectory;
  std::vector<double> dense_times;
  std::vector<StateVector> dense_states;

  const StateVector& final_state() const { return dense_states.back(); }
};

/// Classical RK4 at fixed step dt; observation times must sit on the step
/// grid. Conservation S+I+R is preserved to round-off by construction.
SirSolution integrate_sir(const EpidemicParameters& params, const StateVector& initial,
                          const TimeGrid& grid, double dt = kDefaultStep);

/// Integrate until prevalence drops below 0.5 person (or max_t), returning
/// the state at that moment. Used for final-size checks.
StateVector integrate_to_quiescence(const EpidemicParameters& params, const StateVector& initial,
                                    double dt = kDefaultStep, double max_t = 10000.0);

double basic_reproduction_number(const EpidemicParameters& params);

struct Peak {
  double time;
  double height;
};

/// Argmax of a trajectory; ties break to the earliest time.
Peak peak_of(const Trajectory& traj);

/// Sum of squared differences between the model prevalence at the data's
/// grid and the data, using the same RK4 kernel as integrate_sir.
double sse_objective(const EpidemicParameters& params, const StateVector& initial,
                     const Trajectory& data, double dt = kDefaultStep);

}  // namespace epiident
