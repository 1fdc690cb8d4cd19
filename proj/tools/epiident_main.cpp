// epiident: batch CLI for SIR noise-model identifiability experiments.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epiident/coverage.hpp"
#include "epiident/distfit.hpp"
#include "epiident/identify.hpp"
#include "epiident/io.hpp"
#include "epiident/studies.hpp"
#include "epiident/svg.hpp"

namespace fs = std::filesystem;
using namespace epiident;

namespace {

struct CommonOpts {
  std::uint64_t seed = kDefaultMasterSeed;
  int threads = 0;
  std::string out = "epiident_out";
};

std::string join_args(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

/// Writes the manifest before results, refreshes it when the run finishes.
class ManagedRun {
 public:
  ManagedRun(const CommonOpts& opts, const std::string& command_line) : dir_(opts.out) {
    manifest_.command_line = command_line;
    manifest_.master_seed = opts.seed;
    manifest_.started_at = utc_timestamp();
    fs::create_directories(dir_);
    manifest_.write(dir_ / "manifest.json");
  }
  void add_scenario(const Scenario& sc) {
    manifest_.scenario_hashes.emplace_back(sc.label, fnv1a_hex(scenario_to_kv(sc)));
  }
  void add_step(const std::string& name, int exclusions) {
    manifest_.steps.push_back({name, exclusions});
  }
  const fs::path& dir() const { return dir_; }
  void finish() {
    manifest_.finished_at = utc_timestamp();
    manifest_.write(dir_ / "manifest.json");
  }

 private:
  fs::path dir_;
  RunManifest manifest_;
};

std::string format_cell(double v) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::vector<Scenario> select_scenarios(const std::string& spec, double population, double i0) {
  const auto grid = paper_grid(population, i0);
  if (spec == "all") return grid;
  std::vector<Scenario> out;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const int idx = std::stoi(tok);
    if (idx < 0 || idx >= static_cast<int>(grid.size()))
      throw std::invalid_argument("scenario index out of range: " + tok);
    out.push_back(grid[idx]);
  }
  if (out.empty()) throw std::invalid_argument("no scenarios selected");
  return out;
}

// ---------------------------------------------------------------- scenarios

void cmd_scenarios(const std::string& format, double population, double i0) {
  const auto grid = paper_grid(population, i0);
  if (format == "json") {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& sc : grid)
      rows.push_back({{"label", sc.label},
                      {"alpha", sc.params.alpha},
                      {"beta", sc.params.beta},
                      {"population", sc.params.population},
                      {"r0", basic_reproduction_number(sc.params)}});
    std::cout << rows.dump(2) << '\n';
    return;
  }
  if (format == "csv") {
    std::cout << "index,label,alpha,beta,population,r0\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%zu,%s,%.4g,%.6g,%g,%.2f\n", i, grid[i].label.c_str(),
                    grid[i].params.alpha, grid[i].params.beta, grid[i].params.population,
                    basic_reproduction_number(grid[i].params));
      std::cout << buf;
    }
    return;
  }
  std::cout << "idx  label            alpha   beta       N        R0\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-4zu %-16s %-7.2f %-10.6g %-8g %.2f\n", i,
                  grid[i].label.c_str(), grid[i].params.alpha, grid[i].params.beta,
                  grid[i].params.population, basic_reproduction_number(grid[i].params));
    std::cout << buf;
  }
}

// ----------------------------------------------------------------- simulate

void cmd_simulate(const CommonOpts& opts, const std::string& cmdline, const std::string& mode,
                  double alpha, double beta, double population, double i0, double t_end, int count,
                  bool events_flag) {
  ManagedRun run(opts, cmdline);
  const EpidemicParameters params{alpha, beta, population};
  const StateVector initial{population - i0, i0, 0.0};
  const TimeGrid grid = TimeGrid::daily(0.0, t_end);
  if (mode == "ode") {
    const SirSolution sol = integrate_sir(params, initial, grid);
    write_trajectory_csv(run.dir() / "trajectory.csv", sol, true);
  } else {
    const Ensemble ens = run_ensemble(params, to_integer_state(initial), grid, count,
                                      {opts.seed, 0}, opts.threads);
    write_ensemble_csv(run.dir() / "ensemble.csv", ens);
    nlohmann::ordered_json meta;
    meta["alpha"] = alpha;
    meta["beta"] = beta;
    meta["population"] = population;
    meta["initial_infectious"] = i0;
    meta["count"] = count;
    meta["seed"] = {{"master", opts.seed}, {"stream", 0}};
    meta["generator"] = {{"name", kPrngName}, {"version", kPrngVersion}};
    std::ofstream meta_out(run.dir() / "ensemble.json", std::ios::binary);
    meta_out << meta.dump(2) << '\n';
    if (events_flag) {
      std::ofstream ev(run.dir() / "events.csv", std::ios::binary);
      ev << "run_id,time,event,S,I,R\n";
      for (int j = 0; j < count; ++j) {
        const auto recs = gillespie_run(params, to_integer_state(initial), t_end,
                                        {opts.seed, static_cast<std::uint64_t>(j)});
        for (const auto& r : recs) {
          char buf[160];
          std::snprintf(buf, sizeof(buf), "%d,%.9f,%s,%lld,%lld,%lld\n", j, r.time,
                        r.event == EventType::infection ? "infection" : "recovery", r.susceptible,
                        r.infectious, r.recovered);
          ev << buf;
        }
      }
    }
  }
  run.finish();
}

// ---------------------------------------------------------------- residuals

void cmd_residuals(const CommonOpts& opts, const std::string& cmdline, double alpha, double beta,
                   double population, double i0, int runs, int bins, int max_lag, int acf_runs) {
  ManagedRun run(opts, cmdline);
  const EpidemicParameters params{alpha, beta, population};
  const StateVector initial{population - i0, i0, 0.0};
  const TimeGrid grid = TimeGrid::daily(0.0, 150.0);
  const SirSolution sol = integrate_sir(params, initial, grid);
  const Ensemble ens =
      run_ensemble(params, to_integer_state(initial), grid, runs, {opts.seed, 0}, opts.threads);

  {
    std::ofstream out(run.dir() / "residual_scatter.csv", std::ios::binary);
    out << "t,I_ode,residual,phase,run\n";
    for (std::size_t j = 0; j < ens.runs.size(); ++j) {
      const ResidualSeries rs = scaled_residuals(ens.runs[j], sol.trajectory, static_cast<int>(j));
      const double peak_time = peak_of(sol.trajectory).time;
      for (std::size_t k = 0; k < rs.residuals.size(); ++k) {
        const double base =
            sol.trajectory.prevalence[static_cast<std::size_t>(rs.times[k] - grid.t_start)];
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.9g,%s,%zu\n", rs.times[k], base,
                      rs.residuals[k], to_string(phase_of(rs.times[k], peak_time)), j);
        out << buf;
      }
    }
  }

  // Mean ACF across the first acf_runs CTMC runs vs Gaussian-noise residuals.
  {
    std::vector<std::vector<double>> ctmc_series, gauss_series;
    for (int j = 0; j < std::min<int>(acf_runs, runs); ++j) {
      ctmc_series.push_back(scaled_residuals(ens.runs[j], sol.trajectory, j).residuals);
      const Trajectory g = gaussian_dataset(sol.trajectory, {0.1},
                                            {opts.seed, derive_stream({0xacfULL, static_cast<std::uint64_t>(j)})});
      gauss_series.push_back(scaled_residuals(g, sol.trajectory, j).residuals);
    }
    const AcfCurve c = ensemble_acf(ctmc_series, max_lag);
    const AcfCurve gcurve = ensemble_acf(gauss_series, max_lag);
    std::ofstream out(run.dir() / "acf.csv", std::ios::binary);
    out << "lag,ctmc_mean,ctmc_lo,ctmc_hi,gaussian_mean,gaussian_lo,gaussian_hi\n";
    for (std::size_t k = 0; k < c.lags.size(); ++k) {
      char buf[200];
      std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", c.lags[k],
                    c.mean_acf[k], c.lower[k], c.upper[k], gcurve.mean_acf[k], gcurve.lower[k],
                    gcurve.upper[k]);
      out << buf;
    }
    run.add_step("acf: max_lag=" + std::to_string(max_lag), c.skipped_runs);
  }

  {
    const auto rows = variance_mean(ens.runs, sol.trajectory);
    std::ofstream out(run.dir() / "var_mean.csv", std::ios::binary);
    out << "t,mean,variance,phase\n";
    for (const auto& r : rows) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%.6f,%.9g,%.9g,%s\n", r.time, r.mean, r.variance,
                    to_string(r.phase));
      out << buf;
    }
  }

  const ResidualBank bank = build_residual_bank(ens.runs, sol.trajectory, bins, "custom");
  write_residual_bank(run.dir() / "bank.csv", bank);
  run.add_step("bank warnings", static_cast<int>(bank.warnings().size()));
  run.finish();
}

// ------------------------------------------------------------------ distfit

void cmd_distfit(const CommonOpts& opts, const std::string& cmdline, const std::string& scenarios,
                 double population, double i0, int runs, int bins) {
  ManagedRun run(opts, cmdline);
  const auto selected = select_scenarios(scenarios, population, i0);
  std::ofstream fits_out(run.dir() / "fits.csv", std::ios::binary);
  fits_out << "scenario,bin,phase,family,p1,p2,p3,loglik,aic\n";
  std::vector<StratumFit> all_fits;
  struct AdRow {
    Phase phase;
    AdResult result;
  };
  std::vector<AdRow> ad_rows;

  for (std::size_t s = 0; s < selected.size(); ++s) {
    const Scenario& sc = selected[s];
    run.add_scenario(sc);
    const SirSolution sol = integrate_sir(sc.params, sc.initial, sc.grid);
    const Ensemble ens = run_ensemble(sc.params, to_integer_state(sc.initial), sc.grid, runs,
                                      {opts.seed, derive_stream({0xd157ULL, s})}, opts.threads);
    const ResidualBank bank = build_residual_bank(ens.runs, sol.trajectory, bins, sc.label);
    const auto fits = fit_bank_strata(sc, bank, 20, opts.threads);
    for (const auto& f : fits) {
      for (const auto& r : f.ranked) {
        char buf[320];
        std::snprintf(buf, sizeof(buf), "%s,%d,%s,%s,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      f.scenario.c_str(), f.bin, to_string(f.phase), to_string(r.family),
                      r.params.size() > 0 ? r.params[0] : 0.0, r.params.size() > 1 ? r.params[1] : 0.0,
                      r.params.size() > 2 ? r.params[2] : 0.0, r.loglik, r.aic);
        fits_out << buf;
      }
      const auto& stratum = bank.stratum(f.bin, f.phase);
      const ShiftedSample shifted = shift_residuals(stratum);
      ad_rows.push_back({f.phase, anderson_darling_lognormal(shifted.values)});
    }
    all_fits.insert(all_fits.end(), fits.begin(), fits.end());
  }

  {
    std::ofstream out(run.dir() / "aic_wins.csv", std::ios::binary);
    out << "stratification,stratum,family,share,fits\n";
    for (const auto how :
         {Stratification::overall, Stratification::by_r0_band, Stratification::by_phase}) {
      const char* how_name = how == Stratification::overall  ? "overall"
                             : how == Stratification::by_phase ? "by_phase"
                                                               : "by_r0_band";
      for (const auto& row : aic_win_table(all_fits, how)) {
        for (Family fam : kAllFamilies) {
          char buf[160];
          std::snprintf(buf, sizeof(buf), "%s,%s,%s,%.6f,%d\n", how_name, row.stratum.c_str(),
                        to_string(fam), row.share.at(fam), row.fits);
          out << buf;
        }
      }
    }
  }

  {
    std::ofstream out(run.dir() / "ad_rejections.csv", std::ios::binary);
    out << "level,phase,rate\n";
    for (const double level : {0.10, 0.05, 0.025, 0.01}) {
      for (int which = 0; which < 3; ++which) {  // pre, post, both
        int total = 0, rejected = 0;
        for (const auto& row : ad_rows) {
          const bool match = which == 2 || (which == 0 && row.phase == Phase::pre) ||
                             (which == 1 && row.phase == Phase::post);
          if (!match) continue;
          ++total;
          if (row.result.rejections.at(level)) ++rejected;
        }
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%.3f,%s,%.6f\n", level,
                      which == 0 ? "pre" : which == 1 ? "post" : "both",
                      total ? static_cast<double>(rejected) / total : 0.0);
        out << buf;
      }
    }
  }
  run.add_step("strata fitted", static_cast<int>(all_fits.size()));
  run.finish();
}

// ----------------------------------------------------------------- coverage

void cmd_coverage(const CommonOpts& opts, const std::string& cmdline, const std::string& scenarios,
                  const std::string& methods_csv, double level, int j, int m, double population,
                  double i0, const std::string& truth) {
  ManagedRun run(opts, cmdline);
  const auto selected = select_scenarios(scenarios, population, i0);
  std::vector<MethodSpec> methods;
  {
    std::stringstream ss(methods_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) methods.push_back(MethodSpec::parse(tok));
  }
  if (methods.empty()) throw std::invalid_argument("no methods given");

  CoverageConfig cfg;
  cfg.j_outer = j;
  cfg.m_inner = m;
  cfg.level = level;
  cfg.seed = {opts.seed, 0};
  cfg.threads = opts.threads;
  cfg.truth_is_method = truth == "method";
  cfg.validate();
  for (const auto& sc : selected) run.add_scenario(sc);

  const auto table = coverage_table(selected, methods, cfg);

  std::ofstream out(run.dir() / "coverage_table.csv", std::ios::binary);
  out << "alpha,beta,r0";
  for (const auto& ms : methods) out << ',' << ms.name();
  out << '\n';
  for (std::size_t s = 0; s < selected.size(); ++s) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.2f,%.6g,%.2f", selected[s].params.alpha,
                  selected[s].params.beta, basic_reproduction_number(selected[s].params));
    out << buf;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      if (table[s][mi]) {
        out << ',' << format_cell(table[s][mi]->coverage);
        run.add_step(selected[s].label + "/" + methods[mi].name(),
                     table[s][mi]->excluded_trials);
      } else {
        out << ",NA";
        run.add_step(selected[s].label + "/" + methods[mi].name(), -1);
      }
    }
    out << '\n';
  }
  nlohmann::ordered_json meta;
  meta["level"] = level;
  meta["j_outer"] = j;
  meta["m_inner"] = m;
  meta["truth"] = truth;
  std::ofstream meta_out(run.dir() / "coverage_meta.json", std::ios::binary);
  meta_out << meta.dump(2) << '\n';
  run.finish();
}

// ----------------------------------------------------------------- identify

void cmd_identify(const CommonOpts& opts, const std::string& cmdline, const std::string& method,
                  double alpha, double beta, double population, double i0, int m) {
  ManagedRun run(opts, cmdline);
  Scenario sc;
  sc.label = "custom";
  sc.params = {alpha, beta, population};
  sc.grid = TimeGrid::daily(0.0, 150.0);
  sc.initial = {population - i0, i0, 0.0};
  run.add_scenario(sc);

  IdentifyConfig icfg;
  icfg.threads = opts.threads;
  const MethodSpec ms = MethodSpec::parse(method);
  const IdentifyResult res = mc_identifiability(sc, ms, m, {opts.seed, 0}, icfg);
  write_estimates_csv(run.dir() / "estimates.csv", res.estimates);

  nlohmann::ordered_json summary;
  summary["method"] = ms.name();
  summary["m"] = res.summary.m;
  summary["excluded"] = res.summary.excluded;
  auto param_json = [](const ParameterSpread& p) {
    return nlohmann::ordered_json{
        {"mean", p.mean}, {"sd", p.sd}, {"cv_percent", p.cv_percent}, {"are_percent", p.are_percent}};
  };
  summary["alpha"] = param_json(res.summary.alpha);
  summary["beta"] = param_json(res.summary.beta);
  if (ms.method == Method::gaussian) {
    const auto verdict = identifiability_verdict(res.summary, ms, {ms.sigma});
    summary["identifiable"] = {{"alpha", verdict[0]}, {"beta", verdict[1]}};
  }
  if (res.summary.ellipse) {
    const Ellipse& e = *res.summary.ellipse;
    summary["ellipse95"] = {{"center", {e.center_alpha, e.center_beta}},
                            {"semi_axes", {e.semi_axis_major, e.semi_axis_minor}},
                            {"rotation_rad", e.rotation}};
  }
  std::ofstream sum_out(run.dir() / "summary.json", std::ios::binary);
  sum_out << summary.dump(2) << '\n';

  SvgPlot plot(520, 420, "parameter estimates (" + ms.name() + ")");
  plot.set_labels("alpha", "beta");
  plot.add_scatter(res.estimates, "#4477aa", 2.0);
  if (res.summary.ellipse) {
    const Ellipse& e = *res.summary.ellipse;
    plot.add_ellipse(e.center_alpha, e.center_beta, e.semi_axis_major, e.semi_axis_minor,
                     e.rotation, "#222222");
  }
  plot.add_marker(alpha, beta, "#228833");
  plot.save(run.dir() / "scatter.svg");
  run.add_step("fits", res.summary.excluded);
  run.finish();
}

// --------------------------------------------------------------------- warp

void cmd_warp(const CommonOpts& opts, const std::string& cmdline, const std::string& pops_csv,
              int runs, double population, double i0, bool emit_dists) {
  ManagedRun run(opts, cmdline);
  std::vector<double> pops;
  {
    std::stringstream ss(pops_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) pops.push_back(std::stod(tok));
  }
  const auto grid = paper_grid(population, i0);
  for (const auto& sc : grid) run.add_scenario(sc);
  const auto cells = warp_statistics(grid, pops, runs, {opts.seed, 0}, opts.threads);

  std::ofstream out(run.dir() / "warp_stats.csv", std::ios::binary);
  out << "r0,population,runs_used,missing,mean_a,sd_a,mean_dt,sd_dt\n";
  for (const auto& c : cells) {
    char buf[220];
    if (c.missing)
      std::snprintf(buf, sizeof(buf), "%.2f,%g,%d,1,,,,\n", c.r0, c.population, c.runs_used);
    else
      std::snprintf(buf, sizeof(buf), "%.2f,%g,%d,0,%.9g,%.9g,%.9g,%.9g\n", c.r0, c.population,
                    c.runs_used, c.mean_amplitude, c.sd_amplitude, c.mean_shift, c.sd_shift);
    out << buf;
  }

  if (emit_dists) {
    for (std::size_t s = 0; s < grid.size(); ++s) {
      const Scenario& sc = grid[s];
      const SirSolution sol = integrate_sir(sc.params, sc.initial, sc.grid);
      const Ensemble ens =
          run_ensemble(sc.params, to_integer_state(sc.initial), sc.grid, runs,
                       {opts.seed, derive_stream({0xdab5ULL, s})}, opts.threads);
      std::vector<WarpSample> samples;
      for (const auto& r : ens.runs) {
        try {
          samples.push_back(extract_warp(r, sol.trajectory));
        } catch (const NoTakeoffError&) {
        }
      }
      if (samples.size() >= 10)
        write_warp_distribution(run.dir() / ("warp_dist_" + sc.label + ".csv"),
                                fit_warp_distribution(std::move(samples)));
    }
  }
  run.finish();
}

// -------------------------------------------------------------------- study

void cmd_study_control(const CommonOpts& opts, const std::string& cmdline, double alpha,
                       double beta, double population, double i0, int count, double window) {
  ManagedRun run(opts, cmdline);
  const EpidemicParameters params{alpha, beta, population};
  const StateVector initial{population - i0, i0, 0.0};
  const TimeGrid window_grid = TimeGrid::daily(0.0, window);
  const SirSolution sol = integrate_sir(params, initial, window_grid);
  const Trajectory data = cumulative_incidence(sol);

  CloudConfig ccfg;
  ccfg.population = population;
  ccfg.initial = initial;
  ccfg.threads = opts.threads;
  ccfg.starts = std::max(3 * count, 120);
  const auto cloud = fit_cloud_to_incidence(data, count, {opts.seed, 0}, ccfg);
  run.add_step("cloud fits kept", static_cast<int>(cloud.size()));

  {
    std::ofstream out(run.dir() / "cloud.csv", std::ios::binary);
    out << "alpha,beta\n";
    for (const auto& [a, b] : cloud) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", a, b);
      out << buf;
    }
  }

  ControlScenario ctl;
  ctl.base = params;
  const TimeGrid horizon_grid = TimeGrid::daily(0.0, ctl.horizon);
  {
    std::ofstream fan(run.dir() / "fits_fan.csv", std::ios::binary);
    fan << "member,t,cumulative\n";
    std::ofstream proj(run.dir() / "projections_fan.csv", std::ios::binary);
    proj << "member,t,cumulative_controlled\n";
    for (std::size_t c = 0; c < cloud.size(); ++c) {
      const EpidemicParameters pc{cloud[c].first, cloud[c].second, population};
      const Trajectory inc = cumulative_incidence(integrate_sir(pc, initial, horizon_grid));
      for (std::size_t k = 0; k < inc.prevalence.size(); ++k) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", c, inc.grid.times[k],
                      inc.prevalence[k]);
        fan << buf;
      }
      // Controlled projection, day-resolution output.
      const EpidemicParameters reduced{pc.alpha, pc.beta * (1.0 - ctl.reduction), population};
      const TimeGrid pre_grid = TimeGrid::daily(0.0, ctl.intervention_time);
      const SirSolution pre = integrate_sir(pc, initial, pre_grid);
      StateVector state = pre.final_state();
      for (std::size_t k = 0; k < pre.trajectory.grid.times.size(); ++k) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", c, pre.trajectory.grid.times[k],
                      population - pre.dense_states[static_cast<std::size_t>(
                                       std::llround(pre.trajectory.grid.times[k] / kDefaultStep))]
                                       .susceptible);
        proj << buf;
      }
      double s = state.susceptible, ii = state.infectious, r = state.recovered;
      for (double t = ctl.intervention_time + 1.0; t <= ctl.horizon + 1e-9; t += 1.0) {
        for (int step = 0; step < 20; ++step) sir_rk4_step(reduced, kDefaultStep, s, ii, r);
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", c, t, population - s);
        proj << buf;
      }
    }
  }

  const ControlProjection projection = project_control(cloud, ctl, initial);
  run.add_step("projection exclusions", projection.excluded);
  {
    std::ofstream out(run.dir() / "finals_hist.csv", std::ios::binary);
    out << "member,final_cumulative\n";
    for (std::size_t c = 0; c < projection.final_cumulative.size(); ++c) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%zu,%.6f\n", c, projection.final_cumulative[c]);
      out << buf;
    }
    SvgPlot hist(520, 400, "final cumulative incidence under control");
    hist.set_labels("final cumulative incidence", "count");
    hist.add_hist(projection.final_cumulative, 20, "#4477aa");
    hist.save(run.dir() / "finals_hist.svg");
  }
  run.finish();
}

void cmd_study_register(const CommonOpts& opts, const std::string& cmdline, double alpha,
                        double beta, double population, double i0, int runs) {
  ManagedRun run(opts, cmdline);
  const EpidemicParameters params{alpha, beta, population};
  const StateVector initial{population - i0, i0, 0.0};
  const TimeGrid grid = TimeGrid::daily(0.0, 150.0);
  const SirSolution sol = integrate_sir(params, initial, grid);
  const Ensemble ens =
      run_ensemble(params, to_integer_state(initial), grid, runs, {opts.seed, 0}, opts.threads);
  const RegistrationResult reg = register_at_peak(ens.runs, sol.trajectory);
  run.add_step("no-takeoff skipped", reg.skipped);

  {
    std::ofstream raw(run.dir() / "raw_fan.csv", std::ios::binary);
    raw << "run,t,I\n";
    std::ofstream ali(run.dir() / "aligned_fan.csv", std::ios::binary);
    ali << "run,t,I\n";
    for (std::size_t j = 0; j < reg.aligned.size(); ++j) {
      for (std::size_t k = 0; k < grid.times.size(); ++k) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", j, grid.times[k],
                      ens.runs[j].prevalence[k]);
        raw << buf;
        std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f\n", j, grid.times[k],
                      reg.aligned[j].prevalence[k]);
        ali << buf;
      }
    }
  }
  {
    std::ofstream out(run.dir() / "means.csv", std::ios::binary);
    out << "t,ode,registered_mean,unaligned_mean\n";
    for (std::size_t k = 0; k < grid.times.size(); ++k) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f\n", grid.times[k],
                    sol.trajectory.prevalence[k], reg.registered_mean.prevalence[k],
                    reg.unaligned_mean.prevalence[k]);
      out << buf;
    }
    SvgPlot plot(560, 420, "registered vs unaligned mean");
    plot.set_labels("t (days)", "prevalence");
    auto line = [&](const Trajectory& t) {
      std::vector<std::pair<double, double>> pts;
      for (std::size_t k = 0; k < t.prevalence.size(); ++k)
        pts.emplace_back(t.grid.times[k], t.prevalence[k]);
      return pts;
    };
    plot.add_line(line(sol.trajectory), "#000000", 2.0);
    plot.add_line(line(reg.registered_mean), "#cc3311", 1.5);
    plot.add_line(line(reg.unaligned_mean), "#4477aa", 1.5);
    plot.save(run.dir() / "means.svg");
  }
  char msg[160];
  std::snprintf(msg, sizeof(msg), "rmse_registered=%.4f rmse_unaligned=%.4f peak=%.2f\n",
                reg.rmse_registered, reg.rmse_unaligned, peak_of(sol.trajectory).height);
  std::cout << msg;
  run.finish();
}

// ------------------------------------------------------------------- report

void cmd_report(const std::string& dir_str) {
  const fs::path dir(dir_str);
  std::ofstream out(dir / "report.md", std::ios::binary);
  out << "# epiident results report\n\n";

  const fs::path cov = dir / "coverage_table.csv";
  if (fs::exists(cov)) {
    double level = 0.68;
    const fs::path meta = dir / "coverage_meta.json";
    if (fs::exists(meta)) {
      nlohmann::json j;
      std::ifstream(meta) >> j;
      level = j.value("level", 0.68);
    }
    out << "## Coverage\n\nCells marked `*` lie within ±0.10 of the nominal level "
        << level << ".\n\n";
    std::ifstream in(cov);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string tok;
      std::vector<std::string> cells;
      while (std::getline(ss, tok, ',')) cells.push_back(tok);
      out << '|';
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!header && i >= 3 && cells[i] != "NA") {
          const double v = std::stod(cells[i]);
          out << ' ' << cells[i] << (std::abs(v - level) <= 0.10 ? "*" : "") << " |";
        } else {
          out << ' ' << cells[i] << " |";
        }
      }
      out << '\n';
      if (header) {
        out << '|';
        for (std::size_t i = 0; i < cells.size(); ++i) out << " --- |";
        out << '\n';
        header = false;
      }
    }
    out << '\n';
  } else {
    out << "## Coverage\n\nno results\n\n";
  }

  auto embed_csv = [&](const std::string& name, const std::string& title) {
    const fs::path p = dir / name;
    out << "## " << title << "\n\n";
    if (!fs::exists(p)) {
      out << "no results\n\n";
      return;
    }
    std::ifstream in(p);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      std::stringstream ss(line);
      std::string tok;
      std::vector<std::string> cells;
      while (std::getline(ss, tok, ',')) cells.push_back(tok);
      out << '|';
      for (const auto& c : cells) out << ' ' << (c.empty() ? "-" : c) << " |";
      out << '\n';
      if (header) {
        out << '|';
        for (std::size_t i = 0; i < cells.size(); ++i) out << " --- |";
        out << '\n';
        header = false;
      }
    }
    out << '\n';
  };
  embed_csv("aic_wins.csv", "AIC win shares");
  embed_csv("ad_rejections.csv", "Anderson-Darling rejection rates");
  embed_csv("warp_stats.csv", "Warp statistics");

  const fs::path summary = dir / "summary.json";
  out << "## Identifiability summary\n\n";
  if (fs::exists(summary)) {
    std::ifstream in(summary);
    out << "```json\n" << in.rdbuf() << "```\n";
  } else {
    out << "no results\n";
  }
  std::cout << "wrote " << (dir / "report.md").string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epiident: synthetic-noise models and practical identifiability for the SIR model"};
  app.require_subcommand(1);
  const std::string cmdline = join_args(argc, argv);

  CommonOpts common;
  app.add_option("--seed", common.seed, "master seed (default fixed for reproducibility)");
  app.add_option("--threads", common.threads, "worker threads (0 = all cores)");

  // scenarios
  auto* sc_cmd = app.add_subcommand("scenarios", "inspect the 16-combination parameter grid");
  auto* sc_list = sc_cmd->add_subcommand("list", "print the grid");
  std::string sc_format = "table";
  double sc_n = 1000, sc_i0 = kDefaultScenarioI0;
  sc_list->add_option("--format", sc_format, "table|csv|json");
  sc_list->add_option("--n", sc_n, "population size");
  sc_list->add_option("--i0", sc_i0, "initial infectious count");
  sc_list->callback([&] { cmd_scenarios(sc_format, sc_n, sc_i0); });

  // simulate
  auto* sim = app.add_subcommand("simulate", "integrate the ODE or run CTMC ensembles");
  std::string sim_mode = "ode";
  double sim_alpha = 0.1, sim_beta = 0.0004, sim_n = 1000, sim_i0 = kDefaultScenarioI0,
         sim_tend = 150;
  int sim_count = 1;
  bool sim_events = false;
  sim->add_option("--mode", sim_mode, "ode|ctmc")->check(CLI::IsMember({"ode", "ctmc"}));
  sim->add_option("--alpha", sim_alpha)->check(CLI::PositiveNumber);
  sim->add_option("--beta", sim_beta)->check(CLI::PositiveNumber);
  sim->add_option("--n", sim_n)->check(CLI::PositiveNumber);
  sim->add_option("--i0", sim_i0);
  sim->add_option("--t-end", sim_tend)->check(CLI::PositiveNumber);
  sim->add_option("--count", sim_count)->check(CLI::PositiveNumber);
  sim->add_flag("--events", sim_events, "also write full event logs");
  sim->add_option("--out", common.out, "output directory");
  sim->callback([&] {
    cmd_simulate(common, cmdline, sim_mode, sim_alpha, sim_beta, sim_n, sim_i0, sim_tend,
                 sim_count, sim_events);
  });

  // residuals
  auto* res = app.add_subcommand("residuals", "residual structure diagnostics");
  double res_alpha = 0.1, res_beta = 0.0004, res_n = 1000, res_i0 = kDefaultScenarioI0;
  int res_runs = 1000, res_bins = 10, res_lag = 30, res_acf_runs = 100;
  res->add_option("--alpha", res_alpha)->check(CLI::PositiveNumber);
  res->add_option("--beta", res_beta)->check(CLI::PositiveNumber);
  res->add_option("--n", res_n)->check(CLI::PositiveNumber);
  res->add_option("--i0", res_i0);
  res->add_option("--runs", res_runs)->check(CLI::PositiveNumber);
  res->add_option("--bins", res_bins)->check(CLI::PositiveNumber);
  res->add_option("--max-lag", res_lag)->check(CLI::PositiveNumber);
  res->add_option("--acf-runs", res_acf_runs)->check(CLI::PositiveNumber);
  res->add_option("--out", common.out, "output directory");
  res->callback([&] {
    cmd_residuals(common, cmdline, res_alpha, res_beta, res_n, res_i0, res_runs, res_bins, res_lag,
                  res_acf_runs);
  });

  // distfit
  auto* dfit = app.add_subcommand("distfit", "parametric fits, AIC ranking, A-D test");
  std::string dfit_scen = "all";
  double dfit_n = 1000, dfit_i0 = kDefaultScenarioI0;
  int dfit_runs = 1000, dfit_bins = 10;
  dfit->add_option("--scenarios", dfit_scen, "all or comma-separated indices");
  dfit->add_option("--n", dfit_n)->check(CLI::PositiveNumber);
  dfit->add_option("--i0", dfit_i0);
  dfit->add_option("--runs", dfit_runs)->check(CLI::PositiveNumber);
  dfit->add_option("--bins", dfit_bins)->check(CLI::PositiveNumber);
  dfit->add_option("--out", common.out, "output directory");
  dfit->callback([&] {
    cmd_distfit(common, cmdline, dfit_scen, dfit_n, dfit_i0, dfit_runs, dfit_bins);
  });

  // coverage
  auto* cov = app.add_subcommand("coverage", "six-step coverage protocol");
  std::string cov_scen = "all", cov_methods = "ctmc,gaussian:0.1,gaussian:0.2,empirical,hybrid",
              cov_truth = "ctmc";
  double cov_level = 0.68, cov_n = 1000, cov_i0 = kDefaultScenarioI0;
  int cov_j = 30, cov_m = 300;
  cov->add_option("--scenarios", cov_scen, "all or comma-separated indices");
  cov->add_option("--methods", cov_methods, "comma-separated method specs");
  cov->add_option("--level", cov_level, "confidence level");
  cov->add_option("--j", cov_j, "outer trials (paper: 100)");
  cov->add_option("--m", cov_m, "inner datasets per trial (paper: 1000)");
  cov->add_option("--n", cov_n)->check(CLI::PositiveNumber);
  cov->add_option("--i0", cov_i0);
  cov->add_option("--truth", cov_truth, "ctmc|method")->check(CLI::IsMember({"ctmc", "method"}));
  cov->add_option("--out", common.out, "output directory");
  cov->callback([&] {
    cmd_coverage(common, cmdline, cov_scen, cov_methods, cov_level, cov_j, cov_m, cov_n, cov_i0,
                 cov_truth);
  });

  // identify
  auto* ident = app.add_subcommand("identify", "spread of best-fit estimates for one method");
  std::string ident_method = "ctmc";
  double ident_alpha = 0.1, ident_beta = 0.0004, ident_n = 1000, ident_i0 = kDefaultScenarioI0;
  int ident_m = 1000;
  ident->add_option("--method", ident_method, "ctmc|gaussian:sigma|empirical|hybrid");
  ident->add_option("--alpha", ident_alpha)->check(CLI::PositiveNumber);
  ident->add_option("--beta", ident_beta)->check(CLI::PositiveNumber);
  ident->add_option("--n", ident_n)->check(CLI::PositiveNumber);
  ident->add_option("--i0", ident_i0);
  ident->add_option("--m", ident_m)->check(CLI::PositiveNumber);
  ident->add_option("--out", common.out, "output directory");
  ident->callback([&] {
    cmd_identify(common, cmdline, ident_method, ident_alpha, ident_beta, ident_n, ident_i0,
                 ident_m);
  });

  // warp
  auto* warp = app.add_subcommand("warp", "warp-parameter statistics across R0 and N");
  std::string warp_pops = "100,1000,10000";
  double warp_n = 1000, warp_i0 = kDefaultScenarioI0;
  int warp_runs = 500;
  bool warp_dists = false;
  warp->add_option("--populations", warp_pops, "comma-separated population sizes");
  warp->add_option("--runs", warp_runs)->check(CLI::PositiveNumber);
  warp->add_option("--n", warp_n, "population the grid betas are quoted at");
  warp->add_option("--i0", warp_i0);
  warp->add_flag("--emit-dists", warp_dists, "write per-scenario warp sample files");
  warp->add_option("--out", common.out, "output directory");
  warp->callback([&] {
    cmd_warp(common, cmdline, warp_pops, warp_runs, warp_n, warp_i0, warp_dists);
  });

  // study
  auto* study = app.add_subcommand("study", "appendix reproductions");
  auto* ctl = study->add_subcommand("control", "control-strategy unidentifiability demo");
  double ctl_alpha = 0.1, ctl_beta = 0.0004, ctl_n = 1000, ctl_i0 = kDefaultScenarioI0,
         ctl_window = 15;
  int ctl_count = 100;
  ctl->add_option("--alpha", ctl_alpha)->check(CLI::PositiveNumber);
  ctl->add_option("--beta", ctl_beta)->check(CLI::PositiveNumber);
  ctl->add_option("--n", ctl_n)->check(CLI::PositiveNumber);
  ctl->add_option("--i0", ctl_i0);
  ctl->add_option("--count", ctl_count)->check(CLI::PositiveNumber);
  ctl->add_option("--window", ctl_window, "data window in days")->check(CLI::PositiveNumber);
  ctl->add_option("--out", common.out, "output directory");
  ctl->callback([&] {
    cmd_study_control(common, cmdline, ctl_alpha, ctl_beta, ctl_n, ctl_i0, ctl_count, ctl_window);
  });
  auto* reg = study->add_subcommand("register", "peak-alignment curve registration demo");
  double reg_alpha = 0.2, reg_beta = 0.0004, reg_n = 1000, reg_i0 = kDefaultScenarioI0;
  int reg_runs = 200;
  reg->add_option("--alpha", reg_alpha)->check(CLI::PositiveNumber);
  reg->add_option("--beta", reg_beta)->check(CLI::PositiveNumber);
  reg->add_option("--n", reg_n)->check(CLI::PositiveNumber);
  reg->add_option("--i0", reg_i0);
  reg->add_option("--runs", reg_runs)->check(CLI::PositiveNumber);
  reg->add_option("--out", common.out, "output directory");
  reg->callback([&] {
    cmd_study_register(common, cmdline, reg_alpha, reg_beta, reg_n, reg_i0, reg_runs);
  });

  // report
  auto* rep = app.add_subcommand("report", "render a markdown report from a results directory");
  std::string rep_dir = "epiident_out";
  rep->add_option("--dir", rep_dir, "results directory");
  rep->callback([&] { cmd_report(rep_dir); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
