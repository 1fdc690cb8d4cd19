#include "epiident/studies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "epiident/nelder_mead.hpp"
#include "epiident/parallel.hpp"
#include "epiident/stats.hpp"
#include "epiident/synth.hpp"

namespace epiident {

void ControlScenario::validate() const {
  base.validate();
  // The default intervention lies strictly inside (0,1); the boundary values
  // are legal so the r in {0, 0.3, 0.6, 1} monotonicity sweep is expressible.
  if (!(reduction >= 0.0 && reduction <= 1.0))
    throw std::invalid_argument("reduction must lie in [0,1]");
  if (!(intervention_time >= 0.0 && intervention_time <= horizon))
    throw std::invalid_argument("intervention time must lie within the horizon");
}

Trajectory cumulative_incidence(const SirSolution& sol) {
  Trajectory out;
  out.grid = sol.trajectory.grid;
  out.kind = TrajectoryKind::ode;
  out.prevalence.clear();
  const double n = sol.dense_states.front().susceptible + sol.dense_states.front().infectious +
                   sol.dense_states.front().recovered;
  // Reuse the dense states at observation times.
  const double dt = sol.dense_times[1] - sol.dense_times[0];
  for (double t : out.grid.times) {
    const auto idx = static_cast<std::size_t>(std::llround((t - sol.dense_times.front()) / dt));
    out.prevalence.push_back(n - sol.dense_states[idx].susceptible);
  }
  return out;
}

namespace {

double incidence_sse(const EpidemicParameters& p, const StateVector& initial,
                     const Trajectory& data) {
  const SirSolution sol = integrate_sir(p, initial, data.grid);
  const Trajectory model = cumulative_incidence(sol);
  double sse = 0.0;
  for (std::size_t k = 0; k < data.prevalence.size(); ++k) {
    const double d = model.prevalence[k] - data.prevalence[k];
    sse += d * d;
  }
  return sse;
}

}  // namespace

std::vector<std::pair<double, double>> fit_cloud_to_incidence(const Trajectory& data, int count,
                                                              RngSeed seed,
                                                              const CloudConfig& config) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  if (config.starts < count) throw std::invalid_argument("need at least `count` starts");

  struct CloudFit {
    double alpha, beta, sse;
  };
  std::vector<CloudFit> fits(config.starts, {0.0, 0.0, std::numeric_limits<double>::infinity()});
  const double la_lo = std::log(config.alpha_lo), la_hi = std::log(config.alpha_hi);
  const double lb_lo = std::log(config.beta_lo), lb_hi = std::log(config.beta_hi);

  parallel_for(static_cast<std::size_t>(config.starts), config.threads, [&](std::size_t s) {
    RandomStream rng({seed.master, derive_stream({seed.stream, 0xc10dULL, s})});
    const double la = la_lo + (la_hi - la_lo) * rng.uniform();
    const double lb = lb_lo + (lb_hi - lb_lo) * rng.uniform();
    auto objective = [&](const std::vector<double>& lp) -> double {
      try {
        return incidence_sse({std::exp(lp[0]), std::exp(lp[1]), config.population},
                             config.initial, data);
      } catch (const IntegrationFailure&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    const auto r = nelder_mead(objective, {la, lb}, {std::log(1.1), std::log(1.1)}, 2000, 1e-10);
    if (std::isfinite(r.f)) fits[s] = {std::exp(r.x[0]), std::exp(r.x[1]), r.f};
  });

  std::sort(fits.begin(), fits.end(),
            [](const CloudFit& a, const CloudFit& b) { return a.sse < b.sse; });
  if (!std::isfinite(fits.front().sse)) throw FitFailure("no start produced a finite objective");
  const double band = fits.front().sse * config.sse_band_factor;
  std::vector<std::pair<double, double>> cloud;
  for (const auto& f : fits) {
    if (static_cast<int>(cloud.size()) >= count) break;
    if (f.sse <= band || f.sse == fits.front().sse) cloud.emplace_back(f.alpha, f.beta);
  }
  return cloud;
}

ControlProjection project_control(const std::vector<std::pair<double, double>>& cloud,
                                  const ControlScenario& scenario, const StateVector& initial) {
  scenario.validate();
  if (cloud.empty()) throw std::invalid_argument("empty parameter cloud");
  ControlProjection out;
  for (const auto& [alpha, beta] : cloud) {
    try {
      // Integrate up to the intervention, then continue with reduced beta.
      const EpidemicParameters before{alpha, beta, scenario.base.population};
      const TimeGrid pre_grid = TimeGrid::daily(0.0, scenario.intervention_time);
      const SirSolution pre = integrate_sir(before, initial, pre_grid);
      const StateVector at_intervention = pre.final_state();
      const double reduced_beta = beta * (1.0 - scenario.reduction);
      double s = at_intervention.susceptible;
      double i = at_intervention.infectious;
      double r = at_intervention.recovered;
      if (reduced_beta > 0.0) {
        const EpidemicParameters after{alpha, reduced_beta, scenario.base.population};
        const long long steps =
            std::llround((scenario.horizon - scenario.intervention_time) / kDefaultStep);
        for (long long k = 0; k < steps; ++k) {
          sir_rk4_step(after, kDefaultStep, s, i, r);
          sir_check_state(scenario.intervention_time + (k + 1) * kDefaultStep, s, i, r);
        }
      } else {
        // Full suppression: no transmission after the intervention.
        // S freezes; the final cumulative incidence is already determined.
      }
      out.final_cumulative.push_back(scenario.base.population - s);
    } catch (const IntegrationFailure&) {
      ++out.excluded;
    }
  }
  return out;
}

RegistrationResult register_at_peak(const std::vector<Trajectory>& ensemble,
                                    const Trajectory& ode) {
  const auto& times = ode.grid.times;
  const std::size_t len = times.size();

  std::vector<Trajectory> aligned;
  std::vector<const Trajectory*> kept;
  std::vector<double> shifts;
  int skipped = 0;
  for (const auto& run : ensemble) {
    if (run.prevalence.size() != len)
      throw std::invalid_argument("ensemble and ODE must share the grid");
    try {
      const WarpSample w = extract_warp(run, ode);
      kept.push_back(&run);
      shifts.push_back(w.shift);
    } catch (const NoTakeoffError&) {
      ++skipped;
    }
  }
  if (kept.size() < 10) throw Error("register_at_peak needs at least 10 took-off runs");

  // Aligned value at grid time t is the run evaluated at t - shift (linear
  // interpolation, clamped at the span ends).
  auto interpolate = [&](const Trajectory& run, double q) {
    if (q <= times.front()) return run.prevalence.front();
    if (q >= times.back()) return run.prevalence.back();
    const auto it = std::upper_bound(times.begin(), times.end(), q);
    const std::size_t hi = static_cast<std::size_t>(it - times.begin());
    const std::size_t lo = hi - 1;
    const double frac = (q - times[lo]) / (times[hi] - times[lo]);
    return run.prevalence[lo] * (1.0 - frac) + run.prevalence[hi] * frac;
  };

  RegistrationResult out;
  out.skipped = skipped;
  for (std::size_t j = 0; j < kept.size(); ++j) {
    Trajectory t;
    t.grid = ode.grid;
    t.kind = TrajectoryKind::synthetic;
    t.prevalence.reserve(len);
    for (double q : times) t.prevalence.push_back(interpolate(*kept[j], q - shifts[j]));
    out.aligned.push_back(std::move(t));
  }

  // Overlap window: grid points whose pre-image stays inside the span for
  // every kept run.
  std::vector<bool> in_window(len, true);
  for (std::size_t k = 0; k < len; ++k)
    for (double s : shifts)
      if (times[k] - s < times.front() - 1e-12 || times[k] - s > times.back() + 1e-12)
        in_window[k] = false;

  out.registered_mean.grid = ode.grid;
  out.registered_mean.kind = TrajectoryKind::synthetic;
  out.unaligned_mean.grid = ode.grid;
  out.unaligned_mean.kind = TrajectoryKind::synthetic;
  for (std::size_t k = 0; k < len; ++k) {
    double sr = 0.0, su = 0.0;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      sr += out.aligned[j].prevalence[k];
      su += kept[j]->prevalence[k];
    }
    out.registered_mean.prevalence.push_back(sr / static_cast<double>(kept.size()));
    out.unaligned_mean.prevalence.push_back(su / static_cast<double>(kept.size()));
  }

  double acc_r = 0.0, acc_u = 0.0;
  int n_window = 0;
  for (std::size_t k = 0; k < len; ++k) {
    if (!in_window[k]) continue;
    const double dr = out.registered_mean.prevalence[k] - ode.prevalence[k];
    const double du = out.unaligned_mean.prevalence[k] - ode.prevalence[k];
    acc_r += dr * dr;
    acc_u += du * du;
    ++n_window;
  }
  if (n_window == 0) throw Error("registration overlap window is empty");
  out.rmse_registered = std::sqrt(acc_r / n_window);
  out.rmse_unaligned = std::sqrt(acc_u / n_window);
  return out;
}

}  // namespace epiident
