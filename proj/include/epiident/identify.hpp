#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "epiident/coverage.hpp"
#include "epiident/scenarios.hpp"
#include "epiident/synth.hpp"

namespace epiident {

/// 95%/other-level empirical confidence ellipse under approximate joint
/// normality: sample mean and covariance with the chi-square(2) radius.
struct Ellipse {
  double center_alpha = 0.0, center_beta = 0.0;
  double semi_axis_major = 0.0, semi_axis_minor = 0.0;
  double rotation = 0.0;  // radians, major axis vs alpha axis
  double level = 0.0;

  bool contains(double alpha, double beta) const;
};

Ellipse spread_ellipse(const std::vector<std::pair<double, double>>& estimates, double level);

struct ParameterSpread {
  double mean = 0.0;
  double sd = 0.0;
  double cv_percent = 0.0;
  double are_percent = 0.0;
};

struct SpreadSummary {
  ParameterSpread alpha;
  ParameterSpread beta;
  std::optional<Ellipse> ellipse;  // at 0.95 unless degenerate
  int m = 0;
  int excluded = 0;
};

struct IdentifyResult {
  SpreadSummary summary;
  std::vector<std::pair<double, double>> estimates;
};

struct IdentifyConfig {
  int threads = 0;
  int bank_runs = 1000;
  int bank_bins = 10;
  int warp_runs = 500;
  bool multi_start_fits = true;  // 3-start default FitConfig per the estimate module
};

/// §2.1 workflow: m datasets from the TRUE parameters via the chosen method,
/// fit each, summarize the spread of the estimates.
IdentifyResult mc_identifiability(const Scenario& scenario, const MethodSpec& method, int m,
                                  RngSeed seed, const IdentifyConfig& config = {});

/// Average relative estimation error per parameter, percent:
/// (1/M) * sum |p_hat - p_m| / p_hat * 100.
std::pair<double, double> are(const std::vector<std::pair<double, double>>& estimates,
                              const EpidemicParameters& truth);

/// ARE < 100*sigma rule (strict); defined only for the Gaussian method.
std::array<bool, 2> identifiability_verdict(const SpreadSummary& summary, const MethodSpec& method,
                                            const NoiseSpec& noise);

}  // namespace epiident
