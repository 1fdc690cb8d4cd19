#pragma once

#include <utility>
#include <vector>

#include "epiident/sir.hpp"
#include "epiident/types.hpp"

namespace epiident {

/// Configuration of the least-squares fit over (log alpha, log beta).
struct FitConfig {
  std::vector<std::pair<double, double>> initial_guesses;
  int max_iterations = 2000;
  double tolerance = 1e-10;  // absolute spread of the simplex objective, persons^2
  double population = 0.0;
  StateVector initial;
  double dt = kDefaultStep;

  /// Default start set: the nominal pair plus 0.5x and 2x in both coordinates.
  static FitConfig defaults(const EpidemicParameters& nominal, const StateVector& initial_state);

  /// Single-start variant used inside the coverage inner loop, where the
  /// generating parameters are an excellent start and millions of fits run.
  static FitConfig single_start(const EpidemicParameters& nominal, const StateVector& initial_state,
                                double tolerance = 1e-8);
};

struct Estimate {
  double alpha_hat = 0.0;
  double beta_hat = 0.0;
  double sse = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Nelder-Mead over log-parameter space from each initial guess; returns the
/// guess-wise best. Positivity of (alpha, beta) is guaranteed by the log
/// transform. Throws FitFailure if no start produces a finite objective.
Estimate best_fit(const Trajectory& data, const FitConfig& config);

}  // namespace epiident
