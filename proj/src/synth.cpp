#include "epiident/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "epiident/parallel.hpp"
#include "epiident/stats.hpp"

namespace epiident {

Trajectory gaussian_dataset(const Trajectory& ode, const NoiseSpec& noise, RngSeed seed) {
  if (ode.kind != TrajectoryKind::ode)
    throw std::invalid_argument("gaussian_dataset expects an ODE trajectory");
  if (!(noise.sigma >= 0.0)) throw std::invalid_argument("sigma must be non-negative");
  RandomStream rng(seed);
  Trajectory out;
  out.grid = ode.grid;
  out.kind = TrajectoryKind::synthetic;
  out.prevalence.reserve(ode.prevalence.size());
  for (double v : ode.prevalence) {
    const double y = v * (1.0 + noise.sigma * rng.normal());
    out.prevalence.push_back(y < 0.0 ? 0.0 : y);
  }
  return out;
}

ResidualBank::ResidualBank(std::vector<double> bin_edges, std::vector<std::vector<double>> pre,
                           std::vector<std::vector<double>> post, std::string scenario_label,
                           std::vector<std::string> warnings)
    : edges_(std::move(bin_edges)),
      pre_(std::move(pre)),
      post_(std::move(post)),
      label_(std::move(scenario_label)),
      warnings_(std::move(warnings)) {
  if (pre_.size() != post_.size() || pre_.size() != edges_.size() + 1)
    throw std::invalid_argument("ResidualBank strata do not match bin edges");
  for (std::size_t i = 1; i < edges_.size(); ++i)
    if (!(edges_[i] > edges_[i - 1]))
      throw std::invalid_argument("ResidualBank bin edges must be strictly increasing");
  for (const auto* side : {&pre_, &post_})
    for (const auto& stratum : *side)
      for (double r : stratum)
        if (r < -1.0) throw std::invalid_argument("scaled residual below -1");
}

int ResidualBank::bin_index(double prevalence) const {
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), prevalence);
  return static_cast<int>(it - edges_.begin());
}

const std::vector<double>& ResidualBank::stratum(int bin, Phase phase) const {
  if (bin < 0 || bin >= bins()) throw std::out_of_range("residual bank bin out of range");
  return phase == Phase::pre ? pre_[bin] : post_[bin];
}

ResidualBank build_residual_bank(const std::vector<Trajectory>& ensemble, const Trajectory& ode,
                                 int bins, const std::string& scenario_label) {
  if (bins < 1) throw std::invalid_argument("bins must be >= 1");
  if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
  for (const auto& run : ensemble)
    if (run.prevalence.size() != ode.prevalence.size())
      throw std::invalid_argument("ensemble and ODE must share the grid");

  // Equal-mass bin edges from the ODE prevalence values with I >= 1.
  std::vector<double> usable;
  for (double v : ode.prevalence)
    if (v >= 1.0) usable.push_back(v);
  if (usable.empty()) throw std::invalid_argument("ODE prevalence never reaches 1");
  std::vector<double> edges;
  for (int k = 1; k < bins; ++k)
    edges.push_back(percentile(usable, static_cast<double>(k) / static_cast<double>(bins)));
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  const int n_bins = static_cast<int>(edges.size()) + 1;
  std::vector<std::vector<double>> pre(n_bins), post(n_bins);
  std::vector<std::string> warnings;
  const double peak_time = peak_of(ode).time;
  auto edge_bin = [&](double v) {
    return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
  };
  for (const auto& run : ensemble) {
    for (std::size_t k = 0; k < ode.prevalence.size(); ++k) {
      const double base = ode.prevalence[k];
      if (base < 1.0) continue;
      const double r = (run.prevalence[k] - base) / base;
      auto& side = phase_of(ode.grid.times[k], peak_time) == Phase::pre ? pre : post;
      side[edge_bin(base)].push_back(r);
    }
  }

  // Merge empty strata into the nearest non-empty bin of the same phase.
  for (auto* side : {&pre, &post}) {
    const char* phase_name = side == &pre ? "pre" : "post";
    std::vector<int> non_empty;
    for (int b = 0; b < n_bins; ++b)
      if (!(*side)[b].empty()) non_empty.push_back(b);
    if (non_empty.empty()) {
      // Whole phase empty (e.g. peak at the first grid point): alias the
      // other side so lookups never hit an empty stratum.
      warnings.push_back(std::string("phase '") + phase_name +
                         "' has no residuals; falling back to the other phase");
      *side = side == &pre ? post : pre;
      continue;
    }
    for (int b = 0; b < n_bins; ++b) {
      if (!(*side)[b].empty()) continue;
      int nearest = non_empty.front();
      for (int c : non_empty)
        if (std::abs(c - b) < std::abs(nearest - b)) nearest = c;
      (*side)[b] = (*side)[nearest];
      warnings.push_back("empty stratum (bin " + std::to_string(b) + ", " + phase_name +
                         ") merged into bin " + std::to_string(nearest));
    }
  }

  return ResidualBank(std::move(edges), std::move(pre), std::move(post), scenario_label,
                      std::move(warnings));
}

Trajectory empirical_dataset(const Trajectory& ode, const ResidualBank& bank, RngSeed seed) {
  RandomStream rng(seed);
  const double peak_time = peak_of(ode).time;
  Trajectory out;
  out.grid = ode.grid;
  out.kind = TrajectoryKind::synthetic;
  out.prevalence.reserve(ode.prevalence.size());
  for (std::size_t k = 0; k < ode.prevalence.size(); ++k) {
    const double base = ode.prevalence[k];
    if (base < 1.0) {
      out.prevalence.push_back(base);
      continue;
    }
    const auto& stratum =
        bank.stratum(bank.bin_index(base), phase_of(ode.grid.times[k], peak_time));
    auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(stratum.size()));
    if (idx >= stratum.size()) idx = stratum.size() - 1;
    out.prevalence.push_back(base * (1.0 + stratum[idx]));
  }
  return out;
}

std::vector<double> smooth_3day(const std::vector<double>& values) {
  std::vector<double> out(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    double acc = values[k];
    double n = 1.0;
    if (k > 0) {
      acc += values[k - 1];
      n += 1.0;
    }
    if (k + 1 < values.size()) {
      acc += values[k + 1];
      n += 1.0;
    }
    out[k] = acc / n;
  }
  return out;
}

namespace {

// Final-size proxy from a daily series: initial count plus all positive
// day-over-day increments (within-day churn is invisible at this resolution,
// which is fine for a 10-person takeoff threshold).
double final_size_proxy(const std::vector<double>& prevalence) {
  if (prevalence.empty()) return 0.0;
  double total = prevalence.front();
  for (std::size_t k = 1; k < prevalence.size(); ++k) {
    const double d = prevalence[k] - prevalence[k - 1];
    if (d > 0.0) total += d;
  }
  return total;
}

}  // namespace

WarpSample extract_warp(const Trajectory& ctmc, const Trajectory& ode) {
  if (ctmc.prevalence.size() != ode.prevalence.size())
    throw std::invalid_argument("trajectories must share the grid");
  if (final_size_proxy(ctmc.prevalence) < 10.0) throw NoTakeoffError();

  const Peak ode_peak = peak_of(ode);
  Trajectory smoothed;
  smoothed.grid = ctmc.grid;
  smoothed.kind = ctmc.kind;
  smoothed.prevalence = smooth_3day(ctmc.prevalence);
  const Peak run_peak = peak_of(smoothed);
  return {run_peak.height / ode_peak.height, ode_peak.time - run_peak.time};
}

WarpDistribution::WarpDistribution(std::vector<WarpSample> samples) : samples_(std::move(samples)) {
  if (samples_.size() < 10)
    throw std::invalid_argument("WarpDistribution needs at least 10 samples");
  std::vector<double> a, dt;
  a.reserve(samples_.size());
  dt.reserve(samples_.size());
  for (const auto& s : samples_) {
    if (!(s.amplitude > 0.0)) throw std::invalid_argument("warp amplitude must be positive");
    a.push_back(s.amplitude);
    dt.push_back(s.shift);
  }
  kde_ = std::make_unique<Kde2>(std::move(a), std::move(dt));
  if (kde_->degenerate())
    warnings_.push_back("degenerate warp sample dimension; bandwidth floor 1e-6 applied");
}

WarpSample WarpDistribution::draw(RandomStream& rng) const {
  for (;;) {
    const auto [a, dt] = kde_->sample(rng);
    if (a > 0.0) return {a, dt};
  }
}

WarpDistribution fit_warp_distribution(std::vector<WarpSample> samples) {
  return WarpDistribution(std::move(samples));
}

Trajectory apply_warp(const SirSolution& ode, const WarpSample& w) {
  const auto& times = ode.dense_times;
  if (times.size() < 2) throw std::invalid_argument("dense ODE output too short to warp");
  const double t0 = times.front(), t1 = times.back();
  const double dt = times[1] - times[0];
  Trajectory out;
  out.grid = ode.trajectory.grid;
  out.kind = TrajectoryKind::synthetic;
  out.prevalence.reserve(out.grid.size());
  for (double t : out.grid.times) {
    double q = t + w.shift;
    if (q <= t0) q = t0;
    if (q >= t1) q = t1;
    auto idx = static_cast<std::size_t>((q - t0) / dt);
    if (idx + 1 >= times.size()) idx = times.size() - 2;
    const double frac = (q - times[idx]) / dt;
    const double v = ode.dense_states[idx].infectious * (1.0 - frac) +
                     ode.dense_states[idx + 1].infectious * frac;
    out.prevalence.push_back(w.amplitude * v);
  }
  return out;
}

Trajectory hybrid_dataset(const SirSolution& ode, const WarpDistribution& warp, RngSeed seed) {
  RandomStream rng(seed);
  return apply_warp(ode, warp.draw(rng));
}

std::vector<WarpCell> warp_statistics(const std::vector<Scenario>& scenarios,
                                      const std::vector<double>& populations, int runs_per_cell,
                                      RngSeed seed, int threads) {
  if (runs_per_cell < 1) throw std::invalid_argument("runs_per_cell must be >= 1");
  struct CellTask {
    Scenario scenario;
    double population;
  };
  std::vector<CellTask> tasks;
  for (double n : populations) {
    for (const auto& sc : scenarios) {
      Scenario rescaled = sc;
      rescaled.params.beta = sc.params.beta * sc.params.population / n;
      rescaled.params.population = n;
      rescaled.initial = {n - sc.initial.infectious, sc.initial.infectious, 0.0};
      tasks.push_back({std::move(rescaled), n});
    }
  }

  std::vector<WarpCell> cells(tasks.size());
  for (std::size_t c = 0; c < tasks.size(); ++c) {
    const Scenario& sc = tasks[c].scenario;
    const SirSolution sol = integrate_sir(sc.params, sc.initial, sc.grid);
    std::vector<WarpSample> samples(runs_per_cell, WarpSample{0.0, 0.0});
    std::vector<char> ok(runs_per_cell, 0);
    parallel_for(static_cast<std::size_t>(runs_per_cell), threads, [&](std::size_t r) {
      RngSeed run_seed{seed.master, derive_stream({seed.stream, 0x7a59ULL, c, r})};
      const auto events =
          gillespie_run(sc.params, to_integer_state(sc.initial), sc.grid.t_end, run_seed);
      const Trajectory run = sample_daily(events, to_integer_state(sc.initial), sc.grid);
      try {
        samples[r] = extract_warp(run, sol.trajectory);
        ok[r] = 1;
      } catch (const NoTakeoffError&) {
        ok[r] = 0;
      }
    });
    std::vector<double> a, dt;
    for (int r = 0; r < runs_per_cell; ++r) {
      if (ok[r]) {
        a.push_back(samples[r].amplitude);
        dt.push_back(samples[r].shift);
      }
    }
    WarpCell cell;
    cell.r0 = basic_reproduction_number(sc.params);
    cell.population = tasks[c].population;
    cell.runs_used = static_cast<int>(a.size());
    if (a.size() >= 10) {
      cell.missing = false;
      cell.mean_amplitude = mean_of(a);
      cell.sd_amplitude = stddev_of(a, 1);
      cell.mean_shift = mean_of(dt);
      cell.sd_shift = stddev_of(dt, 1);
    }
    cells[c] = cell;
  }
  return cells;
}

}  // namespace epiident
