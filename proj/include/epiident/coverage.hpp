#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "epiident/estimate.hpp"
#include "epiident/kde2.hpp"
#include "epiident/rng.hpp"
#include "epiident/scenarios.hpp"
#include "epiident/synth.hpp"

namespace epiident {

enum class Method { ctmc, gaussian, empirical, hybrid };

/// A simulation method plus its parameter (sigma for the Gaussian case).
struct MethodSpec {
  Method method = Method::ctmc;
  double sigma = 0.0;

  /// Parses "ctmc", "gaussian:0.1", "empirical", "hybrid".
  static MethodSpec parse(const std::string& text);
  std::string name() const;
};

/// Knobs for the six-step coverage protocol. Desk-scale defaults; the paper
/// scale is J=100, M=1000.
struct CoverageConfig {
  int j_outer = 30;
  int m_inner = 300;
  double level = 0.68;
  MethodSpec method;
  RngSeed seed;
  int threads = 0;
  // Truth-layer simulator: CTMC for every method by default; `method` makes
  // the outer realizations use the method under test instead.
  bool truth_is_method = false;
  int bank_runs = 1000;   // ensemble size behind the empirical method
  int bank_bins = 10;
  int warp_runs = 500;    // extractions behind the hybrid method
  std::optional<long long> min_final_size;  // extinct-run filter (off by default)

  void validate() const;
};

/// KDE highest-density region over an (alpha, beta) estimate cloud.
struct ConfidenceRegion {
  std::shared_ptr<const Kde2> kde;
  double threshold = 0.0;
  double level = 0.0;

  bool contains(double alpha, double beta) const {
    return kde->density(alpha, beta) >= threshold;
  }
};

/// Threshold = the (1-level)-quantile of the KDE density evaluated at the
/// sample points themselves (leave-self-in highest-density-region rule).
ConfidenceRegion kde_region(const std::vector<std::pair<double, double>>& estimates, double level);

struct CoverageReport {
  std::string scenario;
  std::string method;
  double coverage = 0.0;
  int j_outer = 0;
  int m_inner = 0;
  double level = 0.0;
  std::vector<bool> membership;  // per included j-trial
  int excluded_trials = 0;
};

/// §5.1 protocol: J truth realizations -> fit -> M method datasets per fit ->
/// refit -> KDE region -> membership of the true pair. Throws FitFailure when
/// more than 20% of the J trials are excluded.
CoverageReport run_coverage(const Scenario& scenario, const CoverageConfig& config);

/// Full scenarios x methods cross-product; per-cell streams derive from
/// (master, scenario index, method index). Failed cells come back as nullopt.
std::vector<std::vector<std::optional<CoverageReport>>> coverage_table(
    const std::vector<Scenario>& scenarios, const std::vector<MethodSpec>& methods,
    const CoverageConfig& config);

struct SigmaMinResult {
  double sigma_min = 0.0;
  bool saturated = false;  // target unreachable at sigma = 2.0
  std::vector<std::pair<double, double>> curve;  // (sigma, coverage) samples
};

/// Monotone bisection on sigma in [0.01, 2.0] using the Gaussian method;
/// stops when the bracket is narrower than 0.05 or coverage is within 0.03
/// of the target.
SigmaMinResult sigma_min_search(const Scenario& scenario, double target_coverage,
                                CoverageConfig config);

}  // namespace epiident
