#include "epiident/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epiident/parallel.hpp"
#include "epiident/stats.hpp"

namespace epiident {

namespace {

// Stream-derivation tags; any fixed distinct constants work.
constexpr std::uint64_t kTagOuter = 0xc0e1ULL;
constexpr std::uint64_t kTagInner = 0xc0e2ULL;
constexpr std::uint64_t kTagBank = 0xc0e3ULL;
constexpr std::uint64_t kTagWarp = 0xc0e4ULL;

/// Shared per-cell context: the truth-scenario inputs every method needs.
struct MethodContext {
  const Scenario& scenario;
  MethodSpec spec;
  std::optional<ResidualBank> bank;
  std::optional<WarpDistribution> warp;
};

MethodContext make_context(const Scenario& scenario, const MethodSpec& spec,
                           const CoverageConfig& cfg, std::uint64_t cell_stream) {
  MethodContext ctx{scenario, spec, std::nullopt, std::nullopt};
  if (spec.method == Method::empirical || spec.method == Method::hybrid) {
    const SirSolution truth_sol = integrate_sir(scenario.params, scenario.initial, scenario.grid);
    const int runs = spec.method == Method::empirical ? cfg.bank_runs : cfg.warp_runs;
    const std::uint64_t tag = spec.method == Method::empirical ? kTagBank : kTagWarp;
    Ensemble ens = run_ensemble(scenario.params, to_integer_state(scenario.initial), scenario.grid,
                                runs, {cfg.seed.master, derive_stream({cell_stream, tag})},
                                cfg.threads);
    if (cfg.min_final_size) ens = filter_extinct(std::move(ens), *cfg.min_final_size);
    if (spec.method == Method::empirical) {
      ctx.bank.emplace(
          build_residual_bank(ens.runs, truth_sol.trajectory, cfg.bank_bins, scenario.label));
    } else {
      std::vector<WarpSample> samples;
      for (const auto& run : ens.runs) {
        try {
          samples.push_back(extract_warp(run, truth_sol.trajectory));
        } catch (const NoTakeoffError&) {
        }
      }
      ctx.warp.emplace(fit_warp_distribution(std::move(samples)));
    }
  }
  return ctx;
}

/// Generate one dataset from `params` using the context's method. The dense
/// solution at `params` is supplied by the caller so it is integrated once
/// per generating pair, not once per dataset.
Trajectory make_dataset(const MethodContext& ctx, const EpidemicParameters& params,
                        const SirSolution& params_sol, std::uint64_t master,
                        std::uint64_t stream) {
  switch (ctx.spec.method) {
    case Method::ctmc: {
      const IntegerState init = to_integer_state(ctx.scenario.initial);
      const auto events = gillespie_run(params, init, ctx.scenario.grid.t_end, {master, stream});
      return sample_daily(events, init, ctx.scenario.grid);
    }
    case Method::gaussian:
      return gaussian_dataset(params_sol.trajectory, {ctx.spec.sigma}, {master, stream});
    case Method::empirical:
      return empirical_dataset(params_sol.trajectory, *ctx.bank, {master, stream});
    default:
      return hybrid_dataset(params_sol, *ctx.warp, {master, stream});
  }
}

}  // namespace

MethodSpec MethodSpec::parse(const std::string& text) {
  if (text == "ctmc") return {Method::ctmc, 0.0};
  if (text == "empirical") return {Method::empirical, 0.0};
  if (text == "hybrid") return {Method::hybrid, 0.0};
  if (text.rfind("gaussian", 0) == 0) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("gaussian method needs a sigma, e.g. gaussian:0.1");
    const double sigma = std::stod(text.substr(colon + 1));
    if (!(sigma >= 0.0)) throw std::invalid_argument("gaussian sigma must be non-negative");
    return {Method::gaussian, sigma};
  }
  throw std::invalid_argument("unknown method: " + text);
}

std::string MethodSpec::name() const {
  switch (method) {
    case Method::ctmc: return "ctmc";
    case Method::empirical: return "empirical";
    case Method::hybrid: return "hybrid";
    default: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "gaussian:%g", sigma);
      return buf;
    }
  }
}

void CoverageConfig::validate() const {
  if (j_outer < 2) throw std::invalid_argument("j_outer must be >= 2");
  if (m_inner < 50) throw std::invalid_argument("m_inner must be >= 50");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0,1)");
}

ConfidenceRegion kde_region(const std::vector<std::pair<double, double>>& estimates,
                            double level) {
  if (estimates.size() < 50) throw std::invalid_argument("kde_region needs at least 50 estimates");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0,1)");
  std::vector<double> a, b;
  a.reserve(estimates.size());
  b.reserve(estimates.size());
  for (const auto& [x, y] : estimates) {
    a.push_back(x);
    b.push_back(y);
  }
  auto kde = std::make_shared<Kde2>(std::move(a), std::move(b));
  std::vector<double> densities;
  densities.reserve(estimates.size());
  for (const auto& [x, y] : estimates) densities.push_back(kde->density(x, y));
  std::sort(densities.begin(), densities.end());
  const auto idx = static_cast<std::size_t>(
      std::floor((1.0 - level) * static_cast<double>(densities.size())));
  ConfidenceRegion region;
  region.kde = std::move(kde);
  region.threshold = densities[std::min(idx, densities.size() - 1)];
  region.level = level;
  return region;
}

CoverageReport run_coverage(const Scenario& scenario, const CoverageConfig& config) {
  config.validate();
  const std::uint64_t cell_stream = config.seed.stream;
  const MethodContext ctx = make_context(scenario, config.method, config, cell_stream);
  const IntegerState init = to_integer_state(scenario.initial);
  const SirSolution truth_sol = integrate_sir(scenario.params, scenario.initial, scenario.grid);

  enum class TrialState { ok, excluded };
  std::vector<TrialState> state(config.j_outer, TrialState::excluded);
  std::vector<bool> member(config.j_outer, false);

  parallel_for(static_cast<std::size_t>(config.j_outer), config.threads, [&](std::size_t j) {
    // Step 1: one truth realization (CTMC unless truth_is_method).
    Trajectory outer;
    const std::uint64_t outer_stream = derive_stream({cell_stream, kTagOuter, j});
    if (config.truth_is_method) {
      outer = make_dataset(ctx, scenario.params, truth_sol, config.seed.master, outer_stream);
    } else {
      const auto events =
          gillespie_run(scenario.params, init, scenario.grid.t_end, {config.seed.master, outer_stream});
      outer = sample_daily(events, init, scenario.grid);
    }

    // Step 2: fit the realization.
    Estimate outer_fit;
    try {
      outer_fit = best_fit(outer, FitConfig::defaults(scenario.params, scenario.initial));
    } catch (const FitFailure&) {
      return;  // trial stays excluded
    }
    const EpidemicParameters fitted{outer_fit.alpha_hat, outer_fit.beta_hat,
                                    scenario.params.population};

    // Steps 3-4: M datasets from the fitted pair, refit each.
    SirSolution fitted_sol;
    try {
      fitted_sol = integrate_sir(fitted, scenario.initial, scenario.grid);
    } catch (const IntegrationFailure&) {
      return;
    }
    const FitConfig inner_cfg = FitConfig::single_start(fitted, scenario.initial);
    std::vector<std::pair<double, double>> cloud;
    cloud.reserve(config.m_inner);
    for (int m = 0; m < config.m_inner; ++m) {
      const std::uint64_t inner_stream =
          derive_stream({cell_stream, kTagInner, j, static_cast<std::uint64_t>(m)});
      const Trajectory data =
          make_dataset(ctx, fitted, fitted_sol, config.seed.master, inner_stream);
      try {
        const Estimate e = best_fit(data, inner_cfg);
        cloud.emplace_back(e.alpha_hat, e.beta_hat);
      } catch (const FitFailure&) {
      }
    }
    if (static_cast<int>(cloud.size()) < 50) return;

    // Steps 5-6: HDR region from the cloud; does it contain the truth?
    const ConfidenceRegion region = kde_region(cloud, config.level);
    member[j] = region.contains(scenario.params.alpha, scenario.params.beta);
    state[j] = TrialState::ok;
  });

  CoverageReport report;
  report.scenario = scenario.label;
  report.method = config.method.name();
  report.j_outer = config.j_outer;
  report.m_inner = config.m_inner;
  report.level = config.level;
  int included = 0, covered = 0;
  for (int j = 0; j < config.j_outer; ++j) {
    if (state[j] == TrialState::ok) {
      report.membership.push_back(member[j]);
      ++included;
      if (member[j]) ++covered;
    } else {
      ++report.excluded_trials;
    }
  }
  if (included == 0 ||
      static_cast<double>(report.excluded_trials) > 0.2 * static_cast<double>(config.j_outer))
    throw FitFailure("coverage run excluded more than 20% of outer trials");
  report.coverage = static_cast<double>(covered) / static_cast<double>(included);
  return report;
}

std::vector<std::vector<std::optional<CoverageReport>>> coverage_table(
    const std::vector<Scenario>& scenarios, const std::vector<MethodSpec>& methods,
    const CoverageConfig& config) {
  std::vector<std::vector<std::optional<CoverageReport>>> table(
      scenarios.size(), std::vector<std::optional<CoverageReport>>(methods.size()));
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    for (std::size_t m = 0; m < methods.size(); ++m) {
      CoverageConfig cell = config;
      cell.method = methods[m];
      cell.seed.stream = derive_stream({config.seed.stream, s, m});
      try {
        table[s][m] = run_coverage(scenarios[s], cell);
      } catch (const Error&) {
        table[s][m] = std::nullopt;
      }
    }
  }
  return table;
}

SigmaMinResult sigma_min_search(const Scenario& scenario, double target_coverage,
                                CoverageConfig config) {
  if (!(target_coverage >= 0.0 && target_coverage < 1.0))
    throw std::invalid_argument("target coverage must lie in [0,1)");
  double lo = 0.01, hi = 2.0;
  SigmaMinResult out;
  if (target_coverage <= 0.0) {
    out.sigma_min = lo;
    return out;
  }
  auto coverage_at = [&](double sigma) {
    CoverageConfig cfg = config;
    cfg.method = {Method::gaussian, sigma};
    cfg.seed.stream = derive_stream({config.seed.stream, 0x519aULL,
                                     static_cast<std::uint64_t>(std::llround(sigma * 1e6))});
    const double c = run_coverage(scenario, cfg).coverage;
    out.curve.emplace_back(sigma, c);
    return c;
  };

  if (coverage_at(hi) < target_coverage) {
    out.saturated = true;
    out.sigma_min = hi;
    return out;
  }
  double mid = hi;
  while (hi - lo >= 0.05) {
    mid = 0.5 * (lo + hi);
    const double c = coverage_at(mid);
    if (std::abs(c - target_coverage) <= 0.03) {
      out.sigma_min = mid;
      return out;
    }
    if (c < target_coverage)
      lo = mid;
    else
      hi = mid;
  }
  out.sigma_min = hi;
  return out;
}

}  // namespace epiident
