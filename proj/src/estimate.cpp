#include "epiident/estimate.hpp"

#include <cmath>
#include <limits>

#include "epiident/nelder_mead.hpp"

namespace epiident {

FitConfig FitConfig::defaults(const EpidemicParameters& nominal, const StateVector& initial_state) {
  FitConfig cfg;
  cfg.initial_guesses = {{nominal.alpha, nominal.beta},
                         {0.5 * nominal.alpha, 0.5 * nominal.beta},
                         {2.0 * nominal.alpha, 2.0 * nominal.beta}};
  cfg.population = nominal.population;
  cfg.initial = initial_state;
  return cfg;
}

FitConfig FitConfig::single_start(const EpidemicParameters& nominal,
                                  const StateVector& initial_state, double tolerance) {
  FitConfig cfg;
  cfg.initial_guesses = {{nominal.alpha, nominal.beta}};
  cfg.population = nominal.population;
  cfg.initial = initial_state;
  cfg.tolerance = tolerance;
  return cfg;
}

Estimate best_fit(const Trajectory& data, const FitConfig& config) {
  if (config.initial_guesses.empty()) throw std::invalid_argument("no initial guesses");
  if (!(config.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  for (double v : data.prevalence)
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("data must be non-negative");

  auto objective = [&](const std::vector<double>& log_params) -> double {
    const EpidemicParameters p{std::exp(log_params[0]), std::exp(log_params[1]),
                               config.population};
    if (!std::isfinite(p.alpha) || !std::isfinite(p.beta) || p.alpha <= 0.0 || p.beta <= 0.0)
      return std::numeric_limits<double>::infinity();
    try {
      return sse_objective(p, config.initial, data, config.dt);
    } catch (const IntegrationFailure&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  // 10% multiplicative perturbation per log coordinate for the initial simplex.
  const double step = std::log(1.1);
  bool any_finite = false;
  Estimate best;
  double best_f = std::numeric_limits<double>::infinity();
  for (const auto& [a0, b0] : config.initial_guesses) {
    if (!(a0 > 0.0) || !(b0 > 0.0)) throw std::invalid_argument("initial guesses must be positive");
    const auto r = nelder_mead(objective, {std::log(a0), std::log(b0)}, {step, step},
                               config.max_iterations, config.tolerance);
    if (!std::isfinite(r.f)) continue;
    any_finite = true;
    if (r.f < best_f) {
      best_f = r.f;
      best.alpha_hat = std::exp(r.x[0]);
      best.beta_hat = std::exp(r.x[1]);
      best.converged = r.converged;
      best.iterations = r.iterations;
    }
  }
  if (!any_finite) throw FitFailure("no start produced a finite objective");
  // Re-evaluate at the reported natural-space parameters so that the stored
  // sse matches them exactly.
  best.sse = sse_objective({best.alpha_hat, best.beta_hat, config.population}, config.initial,
                           data, config.dt);
  return best;
}

}  // namespace epiident
