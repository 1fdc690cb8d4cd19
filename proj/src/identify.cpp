#include "epiident/identify.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epiident/parallel.hpp"
#include "epiident/stats.hpp"

namespace epiident {

namespace {
constexpr std::uint64_t kTagIdentify = 0x1de1ULL;
constexpr std::uint64_t kTagIdentBank = 0x1de2ULL;
constexpr std::uint64_t kTagIdentWarp = 0x1de3ULL;
}  // namespace

bool Ellipse::contains(double alpha, double beta) const {
  const double dx = alpha - center_alpha, dy = beta - center_beta;
  const double c = std::cos(rotation), s = std::sin(rotation);
  const double u = c * dx + s * dy;
  const double v = -s * dx + c * dy;
  const double a2 = semi_axis_major * semi_axis_major;
  const double b2 = semi_axis_minor * semi_axis_minor;
  return u * u / a2 + v * v / b2 <= 1.0;
}

Ellipse spread_ellipse(const std::vector<std::pair<double, double>>& estimates, double level) {
  if (estimates.size() < 10) throw std::invalid_argument("spread_ellipse needs >= 10 estimates");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0,1)");
  std::vector<double> a, b;
  a.reserve(estimates.size());
  b.reserve(estimates.size());
  for (const auto& [x, y] : estimates) {
    a.push_back(x);
    b.push_back(y);
  }
  const double ma = mean_of(a), mb = mean_of(b);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  const double n1 = static_cast<double>(a.size()) - 1.0;
  saa /= n1;
  sbb /= n1;
  sab /= n1;
  const double det = saa * sbb - sab * sab;
  const double scale = std::max({saa, sbb, std::abs(sab)});
  if (!(det > 1e-12 * scale * scale) || scale == 0.0)
    throw DegenerateEllipseError("estimate covariance is singular");

  // Eigendecomposition of the 2x2 covariance.
  const double tr = saa + sbb;
  const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
  const double l1 = tr / 2.0 + disc;  // major
  const double l2 = tr / 2.0 - disc;
  const double r2 = chi2_quantile_df2(level);
  Ellipse e;
  e.center_alpha = ma;
  e.center_beta = mb;
  e.semi_axis_major = std::sqrt(l1 * r2);
  e.semi_axis_minor = std::sqrt(l2 * r2);
  e.rotation = sab == 0.0 && saa >= sbb ? 0.0 : std::atan2(l1 - saa, sab);
  e.level = level;
  return e;
}

std::pair<double, double> are(const std::vector<std::pair<double, double>>& estimates,
                              const EpidemicParameters& truth) {
  if (estimates.empty()) throw std::invalid_argument("ARE of an empty estimate cloud");
  if (truth.alpha == 0.0 || truth.beta == 0.0)
    throw UndefinedAreError("ARE undefined for a zero true parameter");
  double sa = 0.0, sb = 0.0;
  for (const auto& [a, b] : estimates) {
    sa += std::abs(truth.alpha - a) / truth.alpha;
    sb += std::abs(truth.beta - b) / truth.beta;
  }
  const double m = static_cast<double>(estimates.size());
  return {100.0 * sa / m, 100.0 * sb / m};
}

std::array<bool, 2> identifiability_verdict(const SpreadSummary& summary, const MethodSpec& method,
                                            const NoiseSpec& noise) {
  if (method.method != Method::gaussian)
    throw RuleInapplicableError(
        "the ARE-below-noise rule is defined only for the Gaussian method");
  const double threshold = 100.0 * noise.sigma;
  return {summary.alpha.are_percent < threshold, summary.beta.are_percent < threshold};
}

IdentifyResult mc_identifiability(const Scenario& scenario, const MethodSpec& method, int m,
                                  RngSeed seed, const IdentifyConfig& config) {
  if (m < 50) throw std::invalid_argument("mc_identifiability needs m >= 50");
  const SirSolution truth_sol = integrate_sir(scenario.params, scenario.initial, scenario.grid);
  const IntegerState init = to_integer_state(scenario.initial);

  std::optional<ResidualBank> bank;
  std::optional<WarpDistribution> warp;
  if (method.method == Method::empirical) {
    Ensemble ens =
        run_ensemble(scenario.params, init, scenario.grid, config.bank_runs,
                     {seed.master, derive_stream({seed.stream, kTagIdentBank})}, config.threads);
    bank.emplace(build_residual_bank(ens.runs, truth_sol.trajectory, config.bank_bins,
                                     scenario.label));
  } else if (method.method == Method::hybrid) {
    Ensemble ens =
        run_ensemble(scenario.params, init, scenario.grid, config.warp_runs,
                     {seed.master, derive_stream({seed.stream, kTagIdentWarp})}, config.threads);
    std::vector<WarpSample> samples;
    for (const auto& run : ens.runs) {
      try {
        samples.push_back(extract_warp(run, truth_sol.trajectory));
      } catch (const NoTakeoffError&) {
      }
    }
    warp.emplace(fit_warp_distribution(std::move(samples)));
  }

  const FitConfig fit_cfg =
      config.multi_start_fits ? FitConfig::defaults(scenario.params, scenario.initial)
                              : FitConfig::single_start(scenario.params, scenario.initial);
  std::vector<std::pair<double, double>> cloud(m, {0.0, 0.0});
  std::vector<char> ok(m, 0);
  parallel_for(static_cast<std::size_t>(m), config.threads, [&](std::size_t i) {
    const std::uint64_t stream = derive_stream({seed.stream, kTagIdentify, i});
    Trajectory data;
    switch (method.method) {
      case Method::ctmc: {
        const auto events =
            gillespie_run(scenario.params, init, scenario.grid.t_end, {seed.master, stream});
        data = sample_daily(events, init, scenario.grid);
        break;
      }
      case Method::gaussian:
        data = gaussian_dataset(truth_sol.trajectory, {method.sigma}, {seed.master, stream});
        break;
      case Method::empirical:
        data = empirical_dataset(truth_sol.trajectory, *bank, {seed.master, stream});
        break;
      default:
        data = hybrid_dataset(truth_sol, *warp, {seed.master, stream});
    }
    try {
      const Estimate e = best_fit(data, fit_cfg);
      cloud[i] = {e.alpha_hat, e.beta_hat};
      ok[i] = 1;
    } catch (const FitFailure&) {
      ok[i] = 0;
    }
  });

  IdentifyResult out;
  for (int i = 0; i < m; ++i) {
    if (ok[i])
      out.estimates.push_back(cloud[i]);
    else
      ++out.summary.excluded;
  }
  if (out.estimates.empty()) throw FitFailure("every dataset fit failed");

  std::vector<double> alphas, betas;
  alphas.reserve(out.estimates.size());
  betas.reserve(out.estimates.size());
  for (const auto& [a, b] : out.estimates) {
    alphas.push_back(a);
    betas.push_back(b);
  }
  const auto [are_a, are_b] = are(out.estimates, scenario.params);
  auto spread = [](const std::vector<double>& xs, double are_pct) {
    ParameterSpread s;
    s.mean = mean_of(xs);
    s.sd = xs.size() > 1 ? stddev_of(xs, 1) : 0.0;
    s.cv_percent = s.mean != 0.0 ? 100.0 * s.sd / s.mean : 0.0;
    s.are_percent = are_pct;
    return s;
  };
  out.summary.alpha = spread(alphas, are_a);
  out.summary.beta = spread(betas, are_b);
  out.summary.m = static_cast<int>(out.estimates.size());
  try {
    out.summary.ellipse = spread_ellipse(out.estimates, 0.95);
  } catch (const std::exception&) {
    out.summary.ellipse = std::nullopt;
  }
  return out;
}

}  // namespace epiident
