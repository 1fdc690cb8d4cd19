#pragma once

#include <memory>
#include <string>
#include <vector>

#include "epiident/gillespie.hpp"
#include "epiident/kde2.hpp"
#include "epiident/residuals.hpp"
#include "epiident/rng.hpp"
#include "epiident/scenarios.hpp"
#include "epiident/sir.hpp"
#include "epiident/types.hpp"

namespace epiident {

/// Relative noise level of the independent Gaussian generator.
struct NoiseSpec {
  double sigma = 0.1;
};

/// y(t) = I(t) * (1 + eps), eps ~ N(0, sigma^2) independently per point,
/// clamped at zero from below.
Trajectory gaussian_dataset(const Trajectory& ode, const NoiseSpec& noise, RngSeed seed);

/// Scaled residuals stratified by (prevalence bin, epidemic phase).
/// Bins are equal-mass quantile bins of the source ODE prevalence values
/// (restricted to points with prevalence >= 1).
class ResidualBank {
 public:
  ResidualBank(std::vector<double> bin_edges, std::vector<std::vector<double>> pre,
               std::vector<std::vector<double>> post, std::string scenario_label,
               std::vector<std::string> warnings);

  int bins() const { return static_cast<int>(edges_.size()) + 1; }
  int bin_index(double prevalence) const;
  const std::vector<double>& stratum(int bin, Phase phase) const;
  const std::vector<double>& bin_edges() const { return edges_; }
  const std::string& scenario_label() const { return label_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<double> edges_;  // interior edges, strictly increasing
  std::vector<std::vector<double>> pre_, post_;
  std::string label_;
  std::vector<std::string> warnings_;
};

ResidualBank build_residual_bank(const std::vector<Trajectory>& ensemble, const Trajectory& ode,
                                 int bins, const std::string& scenario_label = "");

/// y(t) = I(t) * (1 + eps), eps resampled uniformly with replacement from the
/// bank stratum matching (bin of I(t), phase of t); points with I(t) < 1 are
/// copied unchanged.
Trajectory empirical_dataset(const Trajectory& ode, const ResidualBank& bank, RngSeed seed);

/// One (amplitude, shift) pair extracted from a stochastic run.
struct WarpSample {
  double amplitude;  // a > 0
  double shift;      // delta t, days
};

/// a = smoothed CTMC peak height / ODE peak height;
/// shift = ODE peak time - smoothed CTMC peak time, so that
/// a * I_ode(t + shift) peaks where the CTMC run does.
/// Throws NoTakeoffError when the run's final size proxy is below 10.
WarpSample extract_warp(const Trajectory& ctmc, const Trajectory& ode);

/// Centered moving average over a 3-day window (truncated at the ends).
std::vector<double> smooth_3day(const std::vector<double>& values);

/// Joint KDE over (a, shift) pairs; amplitude draws are rejected-and-redrawn
/// while non-positive.
class WarpDistribution {
 public:
  explicit WarpDistribution(std::vector<WarpSample> samples);

  WarpSample draw(RandomStream& rng) const;
  const std::vector<WarpSample>& samples() const { return samples_; }
  double bandwidth_amplitude() const { return kde_->bandwidth_x() * kde_->sd_x(); }
  double bandwidth_shift() const { return kde_->bandwidth_y() * kde_->sd_y(); }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<WarpSample> samples_;
  std::unique_ptr<Kde2> kde_;
  std::vector<std::string> warnings_;
};

WarpDistribution fit_warp_distribution(std::vector<WarpSample> samples);

/// One (a, shift) draw per dataset: y(t) = a * I_ode(t + shift), evaluated by
/// linear interpolation on the dense ODE output, clamped to the integration
/// span at the ends.
Trajectory hybrid_dataset(const SirSolution& ode, const WarpDistribution& warp, RngSeed seed);

/// Deterministic variant used by tests and by the sampling path.
Trajectory apply_warp(const SirSolution& ode, const WarpSample& w);

struct WarpCell {
  double r0 = 0.0;
  double population = 0.0;
  int runs_used = 0;
  bool missing = true;
  double mean_amplitude = 0.0, sd_amplitude = 0.0;
  double mean_shift = 0.0, sd_shift = 0.0;
};

/// Empirical warp moments per (scenario R0, population) cell; cells with
/// fewer than 10 took-off runs are reported as missing.
std::vector<WarpCell> warp_statistics(const std::vector<Scenario>& scenarios,
                                      const std::vector<double>& populations, int runs_per_cell,
                                      RngSeed seed, int threads = 0);

}  // namespace epiident
