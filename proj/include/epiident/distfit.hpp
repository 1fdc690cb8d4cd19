#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "epiident/residuals.hpp"
#include "epiident/rng.hpp"
#include "epiident/scenarios.hpp"
#include "epiident/synth.hpp"

namespace epiident {

enum class Family { gamma, lognormal, normal, skewnormal, weibull };

inline constexpr std::array<Family, 5> kAllFamilies = {
    Family::gamma, Family::lognormal, Family::normal, Family::skewnormal, Family::weibull};

const char* to_string(Family f);

/// Parameter layout by family:
///   normal {mu, sigma}, lognormal {mu_log, sigma_log}, gamma {shape, scale},
///   weibull {shape, scale}, skewnormal {location, scale, shape}.
struct FitResult {
  Family family;
  std::vector<double> params;
  double loglik;
  int k;  // parameter count
  double aic;
  bool boundary_flag = false;  // skew-normal |shape| > 50 reported as normal-equivalent
};

struct ShiftedSample {
  std::vector<double> values;
  int nudge_count = 0;  // residuals at exactly -1, nudged to 1e-9
};

/// Shift residuals by +1 onto positive support; exact -1 values become 1e-9.
ShiftedSample shift_residuals(std::span<const double> residuals);

/// Maximum-likelihood fit of one family to positive samples (normal accepts
/// any reals). Deterministic: fixed multi-start grid, no randomness.
FitResult fit_family(Family family, std::span<const double> samples);

struct AicRanking {
  std::vector<FitResult> ranked;  // ascending AIC; ties -> fewer params, then name order
  std::vector<std::string> failures;
  const FitResult& winner() const { return ranked.front(); }
};

AicRanking aic_rank(std::span<const double> samples);

/// Anderson-Darling test of log-normality: A2 on log-transformed shifted
/// residuals against a normal with estimated mean and variance, with the
/// small-sample correction a2_star = a2 * (1 + 0.75/n + 2.25/n^2).
struct AdResult {
  int n;
  double a2;
  double a2_star;
  std::map<double, bool> rejections;  // significance level -> reject?
};

/// Critical values for A2* (normal, both parameters estimated), validated by
/// ad_calibrate before being frozen here.
inline const std::map<double, double> kAdCriticalValues = {
    {0.10, 0.631}, {0.05, 0.752}, {0.025, 0.873}, {0.01, 1.035}};

AdResult anderson_darling_lognormal(std::span<const double> shifted_residuals);

/// Monte Carlo calibration of the critical-value table: rejection rates on
/// true null (log-normal) samples. Each returned rate should match its
/// nominal level to within the sampling error of `replicates`.
std::map<double, double> ad_calibrate(int sample_size, int replicates, RngSeed seed,
                                      int threads = 0);

struct StratumFit {
  std::string scenario;
  double r0;
  int bin;
  Phase phase;
  Family winner;
  int n;
  std::vector<FitResult> ranked;
};

/// AIC-rank every (prevalence bin, phase) stratum of a residual bank.
/// Strata below min_samples are skipped.
std::vector<StratumFit> fit_bank_strata(const Scenario& scenario, const ResidualBank& bank,
                                        int min_samples = 20, int threads = 0);

enum class Stratification { overall, by_r0_band, by_phase };

struct WinTableRow {
  std::string stratum;
  std::map<Family, double> share;
  int fits = 0;
};

/// Proportion of AIC wins per family within each stratum cell.
/// R0 bands: low < 4, 4 <= mid < 8, high >= 8.
std::vector<WinTableRow> aic_win_table(std::span<const StratumFit> fits, Stratification how);

}  // namespace epiident
