#pragma once

#include <span>
#include <vector>

#include "epiident/types.hpp"

namespace epiident {

enum class Phase { pre, post };

inline const char* to_string(Phase p) { return p == Phase::pre ? "pre" : "post"; }

/// Pre iff t < peak time; exact equality counts as post.
inline Phase phase_of(double t, double peak_time) { return t < peak_time ? Phase::pre : Phase::post; }

/// Scaled residuals (ctmc - ode)/ode for one run, restricted to grid points
/// with ode prevalence >= 1.
struct ResidualSeries {
  std::vector<double> times;
  std::vector<double> residuals;
  std::vector<Phase> phases;
  int run_id = 0;
};

ResidualSeries scaled_residuals(const Trajectory& run, const Trajectory& ode, int run_id = 0);

/// Standard sample ACF with overall-mean centering and lag-0 normalization.
/// Throws UndefinedAcfError on a zero-variance series.
std::vector<double> acf(std::span<const double> series, int max_lag);

struct AcfCurve {
  std::vector<int> lags;
  std::vector<double> mean_acf;
  std::vector<double> lower;  // empirical 2.5th percentile across runs
  std::vector<double> upper;  // empirical 97.5th percentile
  int skipped_runs = 0;
};

AcfCurve ensemble_acf(const std::vector<std::vector<double>>& run_series, int max_lag);

struct VarianceMeanRow {
  double time;
  double mean;
  double variance;
  Phase phase;
};

/// Cross-run mean and (sample) variance of the raw infectious counts at each
/// grid time, with pre/post phase taken from the ODE peak.
std::vector<VarianceMeanRow> variance_mean(const std::vector<Trajectory>& ensemble,
                                           const Trajectory& ode);

}  // namespace epiident
