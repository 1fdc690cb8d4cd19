#include "epiident/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epiident/sir.hpp"
#include "epiident/stats.hpp"

namespace epiident {

ResidualSeries scaled_residuals(const Trajectory& run, const Trajectory& ode, int run_id) {
  if (run.prevalence.size() != ode.prevalence.size())
    throw std::invalid_argument("run and ODE trajectories must share the grid");
  const double peak_time = peak_of(ode).time;
  ResidualSeries out;
  out.run_id = run_id;
  for (std::size_t k = 0; k < ode.prevalence.size(); ++k) {
    const double base = ode.prevalence[k];
    if (base < 1.0) continue;
    out.times.push_back(ode.grid.times[k]);
    out.residuals.push_back((run.prevalence[k] - base) / base);
    out.phases.push_back(phase_of(ode.grid.times[k], peak_time));
  }
  return out;
}

std::vector<double> acf(std::span<const double> series, int max_lag) {
  const auto n = static_cast<long long>(series.size());
  if (n <= max_lag + 1) throw std::invalid_argument("series too short for requested max_lag");
  const double m = mean_of(series);
  double denom = 0.0;
  for (double x : series) denom += (x - m) * (x - m);
  if (denom <= 0.0) throw UndefinedAcfError();
  std::vector<double> out(max_lag + 1);
  for (int lag = 0; lag <= max_lag; ++lag) {
    double num = 0.0;
    for (long long t = 0; t + lag < n; ++t) num += (series[t] - m) * (series[t + lag] - m);
    out[lag] = num / denom;
  }
  return out;
}

AcfCurve ensemble_acf(const std::vector<std::vector<double>>& run_series, int max_lag) {
  std::vector<std::vector<double>> acfs;
  int skipped = 0;
  for (const auto& s : run_series) {
    try {
      acfs.push_back(acf(s, max_lag));
    } catch (const Error&) {
      ++skipped;
    }
  }
  if (acfs.size() < 2) throw Error("ensemble_acf needs at least 2 runs with defined ACF");

  AcfCurve curve;
  curve.skipped_runs = skipped;
  for (int lag = 0; lag <= max_lag; ++lag) {
    std::vector<double> at_lag;
    at_lag.reserve(acfs.size());
    for (const auto& a : acfs) at_lag.push_back(a[lag]);
    curve.lags.push_back(lag);
    curve.mean_acf.push_back(mean_of(at_lag));
    curve.lower.push_back(percentile(at_lag, 0.025));
    curve.upper.push_back(percentile(at_lag, 0.975));
  }
  return curve;
}

std::vector<VarianceMeanRow> variance_mean(const std::vector<Trajectory>& ensemble,
                                           const Trajectory& ode) {
  if (ensemble.empty()) throw std::invalid_argument("variance_mean of an empty ensemble");
  const std::size_t len = ode.prevalence.size();
  for (const auto& run : ensemble)
    if (run.prevalence.size() != len)
      throw std::invalid_argument("ensemble and ODE trajectories must share the grid");
  const double peak_time = peak_of(ode).time;

  std::vector<VarianceMeanRow> rows;
  rows.reserve(len);
  std::vector<double> column(ensemble.size());
  for (std::size_t k = 0; k < len; ++k) {
    for (std::size_t j = 0; j < ensemble.size(); ++j) column[j] = ensemble[j].prevalence[k];
    const double m = mean_of(column);
    const double v = ensemble.size() > 1 ? variance_of(column, 1) : 0.0;
    rows.push_back({ode.grid.times[k], m, v, phase_of(ode.grid.times[k], peak_time)});
  }
  return rows;
}

}  // namespace epiident
