// Acceptance suite: one pass/fail line per criterion, exit code = #failures.
// Desk-scale variants of the reference experiments; target < 30 min on a
// typical multi-core machine.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "epiident/coverage.hpp"
#include "epiident/distfit.hpp"
#include "epiident/identify.hpp"
#include "epiident/io.hpp"
#include "epiident/stats.hpp"
#include "epiident/studies.hpp"

using namespace epiident;
namespace fs = std::filesystem;

namespace {

std::string g_cli_path;
constexpr std::uint64_t kSeed = 20240501ULL;

struct Outcome {
  bool pass;
  std::string detail;
};

double final_size_root(double alpha, double beta, double n, double i0) {
  const double s0 = n - i0;
  auto g = [&](double s) { return std::log(s / s0) - beta / alpha * (s - s0 - i0); };
  double lo = 1e-9, hi = s0 * (1.0 - 1e-12);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

std::string fmt(const char* spec, ...) {
  char buf[512];
  va_list args;
  va_start(args, spec);
  std::vsnprintf(buf, sizeof(buf), spec, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome criterion1_ode() {
  double worst_conservation = 0.0, worst_final_size = 0.0;
  for (const auto& sc : paper_grid(1000.0)) {
    const auto sol = integrate_sir(sc.params, sc.initial, sc.grid);
    for (const auto& s : sol.dense_states)
      worst_conservation = std::max(worst_conservation, std::abs(s.total() - 1000.0) / 1000.0);
    const StateVector quiet = integrate_to_quiescence(sc.params, sc.initial);
    const double oracle =
        final_size_root(sc.params.alpha, sc.params.beta, 1000.0, sc.initial.infectious);
    worst_final_size =
        std::max(worst_final_size, std::abs(quiet.susceptible - oracle) / oracle);
  }
  const bool pass = worst_conservation < 1e-9 && worst_final_size < 1e-6;
  return {pass, fmt("max conservation error %.2e (< 1e-9), max final-size residual %.2e (< 1e-6)",
                    worst_conservation, worst_final_size)};
}

Outcome criterion2_gillespie() {
  const EpidemicParameters p{0.1, 0.0004, 1000};
  const IntegerState init{990, 10, 0};
  const int n = 10000;
  double sum_tau = 0.0;
  int infections_first = 0;
  std::vector<double> gaps;
  gaps.reserve(20000);
  for (int j = 0; j < n; ++j) {
    const auto events =
        gillespie_run(p, init, 150.0, {kSeed, derive_stream({0xac2ULL, static_cast<std::uint64_t>(j)})});
    if (events.empty()) continue;
    sum_tau += events.front().time;
    if (events.front().event == EventType::infection) ++infections_first;
    if (gaps.size() < 10000) {
      long long s = init.susceptible, i = init.infectious;
      double t_prev = 0.0;
      for (const auto& e : events) {
        gaps.push_back((e.time - t_prev) * (p.beta * s * i + p.alpha * i));
        if (gaps.size() == 10000) break;
        t_prev = e.time;
        s = e.susceptible;
        i = e.infectious;
      }
    }
  }
  const double mean_tau = sum_tau / n;
  const double expect_tau = 1.0 / 4.96;
  const double se_tau = expect_tau / std::sqrt(static_cast<double>(n));
  const double prop = static_cast<double>(infections_first) / n;
  const double expect_prop = 3.96 / 4.96;
  const double se_prop = std::sqrt(expect_prop * (1.0 - expect_prop) / n);
  const double ks = std::sqrt(10000.0) * ks_statistic_exp1(gaps);
  const double ks_crit = kolmogorov_critical(0.01);
  const bool pass = std::abs(mean_tau - expect_tau) < 3.0 * se_tau &&
                    std::abs(prop - expect_prop) < 3.0 * se_prop && ks < ks_crit;
  return {pass, fmt("waiting-time mean %.5f vs %.5f (3SE %.5f); infection share %.4f vs %.4f "
                    "(3SE %.4f); KS %.3f < %.3f",
                    mean_tau, expect_tau, 3 * se_tau, prop, expect_prop, 3 * se_prop, ks,
                    ks_crit)};
}

Outcome criterion3_residual_structure() {
  Scenario sc;
  sc.label = "a0.20_b0.0004";
  sc.params = {0.2, 0.0004, 1000};
  sc.grid = TimeGrid::daily(0.0, 150.0);
  sc.initial = {990, 10, 0};
  const auto sol = integrate_sir(sc.params, sc.initial, sc.grid);
  const Ensemble ens = run_ensemble(sc.params, to_integer_state(sc.initial), sc.grid, 1000,
                                    {kSeed, derive_stream({0xac3ULL})}, 0);
  const auto rows = variance_mean(ens.runs, sol.trajectory);
  int eligible = 0, super = 0;
  for (const auto& r : rows) {
    if (r.phase != Phase::pre || r.mean < 1.0) continue;
    ++eligible;
    if (r.variance > r.mean) ++super;
  }
  const double super_share = eligible ? static_cast<double>(super) / eligible : 0.0;

  std::vector<std::vector<double>> ctmc_series, gauss_series;
  for (int j = 0; j < 100; ++j) {
    ctmc_series.push_back(scaled_residuals(ens.runs[j], sol.trajectory, j).residuals);
    const Trajectory g = gaussian_dataset(
        sol.trajectory, {0.1}, {kSeed, derive_stream({0xac4ULL, static_cast<std::uint64_t>(j)})});
    gauss_series.push_back(scaled_residuals(g, sol.trajectory, j).residuals);
  }
  const AcfCurve ctmc_curve = ensemble_acf(ctmc_series, 30);
  const AcfCurve gauss_curve = ensemble_acf(gauss_series, 30);
  const double band = 2.0 / std::sqrt(static_cast<double>(gauss_series.front().size()));
  bool gauss_in_band = true;
  double worst_gauss = 0.0;
  for (int k = 1; k <= 30; ++k) {
    worst_gauss = std::max(worst_gauss, std::abs(gauss_curve.mean_acf[k]));
    if (std::abs(gauss_curve.mean_acf[k]) > band) gauss_in_band = false;
  }
  const bool pass = super_share > 0.8 && ctmc_curve.mean_acf[1] > 0.5 && gauss_in_band;
  return {pass, fmt("super-Poisson share %.3f (> 0.8); CTMC acf[1] %.3f (> 0.5); max |gauss acf| "
                    "%.4f (band %.4f)",
                    super_share, ctmc_curve.mean_acf[1], worst_gauss, band)};
}

Outcome criterion4_distfit() {
  // (a) null calibration at the 0.05 level.
  const auto rates = ad_calibrate(1000, 1000, {kSeed, derive_stream({0xac5ULL})}, 0);
  const double null_rate = rates.at(0.05);
  const bool a_ok = std::abs(null_rate - 0.05) <= 0.02;

  // Banks for all 16 scenarios (AIC) and the even 8 (A-D pooled rate).
  const auto grid = paper_grid(1000.0);
  std::vector<StratumFit> all_fits;
  int ad_total = 0, ad_rejected = 0;
  for (std::size_t s = 0; s < grid.size(); ++s) {
    const Scenario& sc = grid[s];
    const auto sol = integrate_sir(sc.params, sc.initial, sc.grid);
    const Ensemble ens = run_ensemble(sc.params, to_integer_state(sc.initial), sc.grid, 1000,
                                      {kSeed, derive_stream({0xac6ULL, s})}, 0);
    const ResidualBank bank = build_residual_bank(ens.runs, sol.trajectory, 10, sc.label);
    const auto fits = fit_bank_strata(sc, bank, 20, 0);
    all_fits.insert(all_fits.end(), fits.begin(), fits.end());
    if (s % 2 == 0) {
      for (const auto& f : fits) {
        const ShiftedSample shifted = shift_residuals(bank.stratum(f.bin, f.phase));
        ++ad_total;
        if (anderson_darling_lognormal(shifted.values).rejections.at(0.05)) ++ad_rejected;
      }
    }
  }
  const double ad_rate = ad_total ? static_cast<double>(ad_rejected) / ad_total : 0.0;
  const bool b_ok = ad_rate > 0.85;

  const auto overall = aic_win_table(all_fits, Stratification::overall);
  const auto& share = overall.front().share;
  double lognormal_share = share.at(Family::lognormal);
  bool log_highest = true, normal_lowest = true;
  for (Family f : kAllFamilies) {
    if (f != Family::lognormal && share.at(f) >= lognormal_share) log_highest = false;
    if (f != Family::normal && share.at(f) <= share.at(Family::normal)) normal_lowest = false;
  }
  const bool c_ok = log_highest && normal_lowest && overall.front().fits >= 200;
  const bool pass = a_ok && b_ok && c_ok;
  return {pass,
          fmt("A-D null rate %.3f (0.05±0.02); pooled CTMC rejection %.3f (> 0.85); "
              "lognormal share %.3f highest=%d, normal share %.3f lowest=%d over %d fits",
              null_rate, ad_rate, lognormal_share, log_highest ? 1 : 0, share.at(Family::normal),
              normal_lowest ? 1 : 0, overall.front().fits)};
}

Outcome criterion5_coverage() {
  const auto grid = paper_grid(1000.0);
  const std::vector<Scenario> anchors = {grid[0], grid[4], grid[9], grid[15]};
  const std::vector<MethodSpec> methods = {{Method::ctmc, 0.0},
                                           {Method::gaussian, 0.1},
                                           {Method::empirical, 0.0},
                                           {Method::hybrid, 0.0}};
  CoverageConfig cfg;
  cfg.j_outer = 30;
  cfg.m_inner = 300;
  cfg.level = 0.68;
  cfg.seed = {kSeed, derive_stream({0xac7ULL})};
  const auto table = coverage_table(anchors, methods, cfg);

  const double ref_ctmc[4] = {0.77, 0.67, 0.63, 0.64};
  const double ref_gauss[4] = {0.00, 0.04, 0.16, 0.26};
  const double ref_hybrid[4] = {0.79, 0.75, 0.71, 0.66};
  bool pass = true;
  std::string detail;
  for (int s = 0; s < 4; ++s) {
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      if (!table[s][mi]) {
        pass = false;
        detail += fmt("[%d/%s: failed run] ", s, methods[mi].name().c_str());
      }
    }
    if (!pass) continue;
    const double ctmc = table[s][0]->coverage;
    const double gauss = table[s][1]->coverage;
    const double empirical = table[s][2]->coverage;
    const double hybrid = table[s][3]->coverage;
    const bool ok_ctmc = std::abs(ctmc - ref_ctmc[s]) <= 0.12;
    const bool ok_gauss = gauss <= ref_gauss[s] + 0.08;
    const bool ok_emp = empirical <= 0.10;
    const bool ok_hyb = std::abs(hybrid - ref_hybrid[s]) <= 0.12;
    const bool ok_hyb_ctmc = std::abs(hybrid - ctmc) <= 0.12;
    pass = pass && ok_ctmc && ok_gauss && ok_emp && ok_hyb && ok_hyb_ctmc;
    detail += fmt("[s%d ctmc %.2f|%.2f%s g %.2f<=%.2f%s e %.2f%s h %.2f|%.2f%s hc%s] ", s, ctmc,
                  ref_ctmc[s], ok_ctmc ? "" : "!", gauss, ref_gauss[s] + 0.08, ok_gauss ? "" : "!",
                  empirical, ok_emp ? "" : "!", hybrid, ref_hybrid[s], ok_hyb ? "" : "!",
                  ok_hyb_ctmc ? "" : "!");
  }
  return {pass, detail};
}

Outcome criterion6_sigma_min() {
  const auto grid = paper_grid(1000.0);
  const std::vector<Scenario> anchors = {grid[3], grid[9], grid[15]};  // R0 = 2.86, 8.00, 14.29
  CoverageConfig cfg;
  cfg.j_outer = 20;
  cfg.m_inner = 200;
  cfg.level = 0.68;
  std::vector<double> r0s, sigmas;
  std::string detail;
  for (std::size_t s = 0; s < anchors.size(); ++s) {
    cfg.seed = {kSeed, derive_stream({0xac8ULL, s})};
    const SigmaMinResult r = sigma_min_search(anchors[s], 0.68, cfg);
    r0s.push_back(basic_reproduction_number(anchors[s].params));
    sigmas.push_back(r.sigma_min);
    detail += fmt("[R0 %.2f -> sigma_min %.3f%s] ", r0s.back(), r.sigma_min,
                  r.saturated ? " saturated" : "");
  }
  const double rho = spearman_rho(r0s, sigmas);
  const bool pass = sigmas[0] >= 0.5 && rho < 0.0;
  return {pass, detail + fmt("spearman %.2f (< 0)", rho)};
}

Outcome criterion7_identifiability() {
  Scenario sc;
  sc.label = "a0.10_b0.0004";
  sc.params = {0.1, 0.0004, 1000};
  sc.grid = TimeGrid::daily(0.0, 150.0);
  sc.initial = {990, 10, 0};
  const int m = 1000;
  IdentifyConfig icfg;
  const auto ctmc = mc_identifiability(sc, {Method::ctmc, 0.0}, m,
                                       {kSeed, derive_stream({0xac9ULL, 0ULL})}, icfg);
  const auto g01 = mc_identifiability(sc, {Method::gaussian, 0.1}, m,
                                      {kSeed, derive_stream({0xac9ULL, 1ULL})}, icfg);
  const auto g02 = mc_identifiability(sc, {Method::gaussian, 0.2}, m,
                                      {kSeed, derive_stream({0xac9ULL, 2ULL})}, icfg);
  const auto hybrid = mc_identifiability(sc, {Method::hybrid, 0.0}, m,
                                         {kSeed, derive_stream({0xac9ULL, 3ULL})}, icfg);
  const double cv_ctmc_a = ctmc.summary.alpha.cv_percent;
  const double cv_ctmc_b = ctmc.summary.beta.cv_percent;
  const double cv_hyb_a = hybrid.summary.alpha.cv_percent;
  const double cv_hyb_b = hybrid.summary.beta.cv_percent;
  const bool ordering = cv_ctmc_b > g02.summary.beta.cv_percent &&
                        g02.summary.beta.cv_percent > g01.summary.beta.cv_percent;
  const bool ctmc_ok = std::abs(cv_ctmc_a - 4.77) <= 1.5 && std::abs(cv_ctmc_b - 9.64) <= 1.5;
  const bool hyb_ok = std::abs(cv_hyb_a - 6.46) <= 2.0 && std::abs(cv_hyb_b - 11.19) <= 2.0;
  const bool pass = ordering && ctmc_ok && hyb_ok;
  return {pass, fmt("CV(beta): ctmc %.2f > g0.2 %.2f > g0.1 %.2f; ctmc CVs (%.2f, %.2f) vs "
                    "(4.77, 9.64)±1.5; hybrid (%.2f, %.2f) vs (6.46, 11.19)±2",
                    cv_ctmc_b, g02.summary.beta.cv_percent, g01.summary.beta.cv_percent,
                    cv_ctmc_a, cv_ctmc_b, cv_hyb_a, cv_hyb_b)};
}

Outcome criterion8_appendices() {
  // Registration at (0.2, 0.0004), 200 runs.
  Scenario reg_sc;
  reg_sc.params = {0.2, 0.0004, 1000};
  reg_sc.grid = TimeGrid::daily(0.0, 150.0);
  reg_sc.initial = {990, 10, 0};
  const auto sol = integrate_sir(reg_sc.params, reg_sc.initial, reg_sc.grid);
  const Ensemble ens = run_ensemble(reg_sc.params, to_integer_state(reg_sc.initial), reg_sc.grid,
                                    200, {kSeed, derive_stream({0xacaULL})}, 0);
  const RegistrationResult reg = register_at_peak(ens.runs, sol.trajectory);
  const double peak = peak_of(sol.trajectory).height;
  const bool reg_ok =
      reg.rmse_registered / peak < 0.05 && reg.rmse_registered < reg.rmse_unaligned;

  // Control-strategy fan from the early-window ridge.
  Scenario ctl_sc;
  ctl_sc.params = {0.1, 0.0004, 1000};
  ctl_sc.grid = TimeGrid::daily(0.0, 15.0);
  ctl_sc.initial = {990, 10, 0};
  const auto inc = cumulative_incidence(integrate_sir(ctl_sc.params, ctl_sc.initial, ctl_sc.grid));
  CloudConfig ccfg;
  ccfg.population = 1000;
  ccfg.initial = ctl_sc.initial;
  ccfg.starts = 300;
  const auto cloud = fit_cloud_to_incidence(inc, 100, {kSeed, derive_stream({0xacbULL})}, ccfg);
  ControlScenario ctl;
  ctl.base = ctl_sc.params;
  const auto proj = project_control(cloud, ctl, ctl_sc.initial);
  double hi = 0.0, lo = 1e18;
  for (double f : proj.final_cumulative) {
    hi = std::max(hi, f);
    lo = std::min(lo, f);
  }
  const bool fan_ok = hi / lo >= 2.0;
  const bool pass = reg_ok && fan_ok;
  return {pass, fmt("registration rmse/peak %.4f (< 0.05), unaligned %.4f; projection fan "
                    "max/min %.2f (>= 2) over %zu members",
                    reg.rmse_registered / peak, reg.rmse_unaligned / peak, hi / lo,
                    proj.final_cumulative.size())};
}

Outcome criterion9_determinism() {
  if (g_cli_path.empty()) return {false, "CLI path not supplied"};
  const fs::path work = fs::temp_directory_path() / "epiident_acceptance_det";
  fs::remove_all(work);
  fs::create_directories(work);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const fs::path d1 = work / "t2", d2 = work / "t1";
  const std::string base_identify = g_cli_path + " --seed 777 identify --method ctmc --m 80 ";
  if (std::system((base_identify + "--threads 2 --out " + d1.string() + " >/dev/null").c_str()))
    return {false, "identify run 1 failed"};
  if (std::system((base_identify + "--threads 1 --out " + d2.string() + " >/dev/null").c_str()))
    return {false, "identify run 2 failed"};
  const bool identify_ok = slurp(d1 / "estimates.csv") == slurp(d2 / "estimates.csv") &&
                           !slurp(d1 / "estimates.csv").empty();

  const fs::path c1 = work / "c2", c2 = work / "c1";
  const std::string base_cov =
      g_cli_path + " --seed 778 coverage --scenarios 15 --methods gaussian:0.3 --j 4 --m 60 ";
  if (std::system((base_cov + "--threads 2 --out " + c1.string() + " >/dev/null").c_str()))
    return {false, "coverage run 1 failed"};
  if (std::system((base_cov + "--threads 1 --out " + c2.string() + " >/dev/null").c_str()))
    return {false, "coverage run 2 failed"};
  const bool coverage_ok = slurp(c1 / "coverage_table.csv") == slurp(c2 / "coverage_table.csv") &&
                           !slurp(c1 / "coverage_table.csv").empty();
  const bool pass = identify_ok && coverage_ok;
  return {pass, fmt("identify CSVs identical: %d; coverage CSVs identical: %d", identify_ok ? 1 : 0,
                    coverage_ok ? 1 : 0)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli_path = argv[1];
  struct Criterion {
    int number;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "ODE correctness (conservation + final size)", criterion1_ode},
      {2, "Gillespie correctness (waiting times + event mix + Exp(1) gaps)", criterion2_gillespie},
      {3, "residual structure (super-Poisson + ACF contrast)", criterion3_residual_structure},
      {4, "distribution fitting (A-D calibration + rejections + AIC shares)", criterion4_distfit},
      {5, "coverage table at desk scale", criterion5_coverage},
      {6, "sigma_min magnitude and trend", criterion6_sigma_min},
      {7, "identifiability spread (CV ordering + magnitudes)", criterion7_identifiability},
      {8, "appendix reproductions (registration + control fan)", criterion8_appendices},
      {9, "determinism across thread counts", criterion9_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s — %s (%.1fs)\n", out.pass ? "PASS" : "FAIL", c.number,
                c.name, out.detail.c_str(), secs);
    std::fflush(stdout);
    if (!out.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures;
}
