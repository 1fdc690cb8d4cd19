#include "epiident/gillespie.hpp"

#include <stdexcept>

#include "epiident/parallel.hpp"

namespace epiident {

std::vector<EventRecord> gillespie_run(const EpidemicParameters& params, const IntegerState& initial,
                                       double t_end, RngSeed seed) {
  // beta = 0 is legal here (pure death process), unlike the ODE-side invariant.
  if (!(params.alpha > 0.0) || !(params.beta >= 0.0) || !(params.population >= 2.0))
    throw std::invalid_argument("gillespie_run needs alpha > 0, beta >= 0, population >= 2");
  if (initial.susceptible < 0 || initial.infectious < 0 || initial.recovered < 0)
    throw std::invalid_argument("initial state components must be non-negative integers");
  RandomStream rng(seed);
  std::vector<EventRecord> events;

  long long s = initial.susceptible, i = initial.infectious, r = initial.recovered;
  double t = 0.0;
  while (i > 0) {
    const double a1 = params.beta * static_cast<double>(s) * static_cast<double>(i);
    const double a2 = params.alpha * static_cast<double>(i);
    const double total = a1 + a2;
    t += rng.exponential(total);
    if (t >= t_end) break;
    // Infection if u < a1/(a1+a2), recovery otherwise.
    if (rng.uniform() < a1 / total) {
      --s;
      ++i;
      events.push_back({t, EventType::infection, s, i, r});
    } else {
      --i;
      ++r;
      events.push_back({t, EventType::recovery, s, i, r});
    }
  }
  return events;
}

Trajectory sample_daily(const std::vector<EventRecord>& events, const IntegerState& initial,
                        const TimeGrid& grid) {
  Trajectory traj;
  traj.grid = grid;
  traj.kind = TrajectoryKind::ctmc;
  traj.prevalence.reserve(grid.size());
  std::size_t next_event = 0;
  long long current = initial.infectious;
  for (double t : grid.times) {
    while (next_event < events.size() && events[next_event].time <= t) {
      current = events[next_event].infectious;
      ++next_event;
    }
    traj.prevalence.push_back(static_cast<double>(current));
  }
  return traj;
}

long long final_size(const std::vector<EventRecord>& events, const IntegerState& initial) {
  long long infections = initial.infectious;
  for (const auto& e : events)
    if (e.event == EventType::infection) ++infections;
  return infections;
}

Ensemble run_ensemble(const EpidemicParameters& params, const IntegerState& initial,
                      const TimeGrid& grid, int count, RngSeed seed, int threads) {
  if (count < 1) throw std::invalid_argument("ensemble count must be >= 1");
  Ensemble out;
  out.params = params;
  out.seed = seed;
  out.count = count;
  out.runs.resize(count);
  out.final_sizes.resize(count);
  parallel_for(static_cast<std::size_t>(count), threads, [&](std::size_t j) {
    RngSeed run_seed{seed.master, seed.stream + static_cast<std::uint64_t>(j)};
    const auto events = gillespie_run(params, initial, grid.t_end, run_seed);
    out.runs[j] = sample_daily(events, initial, grid);
    out.final_sizes[j] = final_size(events, initial);
  });
  return out;
}

Ensemble filter_extinct(Ensemble ensemble, long long min_final_size) {
  Ensemble out;
  out.params = ensemble.params;
  out.seed = ensemble.seed;
  for (std::size_t j = 0; j < ensemble.runs.size(); ++j) {
    if (ensemble.final_sizes[j] >= min_final_size) {
      out.runs.push_back(std::move(ensemble.runs[j]));
      out.final_sizes.push_back(ensemble.final_sizes[j]);
    }
  }
  out.count = static_cast<int>(out.runs.size());
  return out;
}

}  // namespace epiident
