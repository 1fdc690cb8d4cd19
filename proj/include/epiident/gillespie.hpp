#pragma once

#include <cstdint>
#include <vector>

#include "epiident/rng.hpp"
#include "epiident/types.hpp"

namespace epiident {

enum class EventType { infection, recovery };

/// One CTMC transition: the time it fired and the integer state after it.
struct EventRecord {
  double time;
  EventType event;
  long long susceptible;
  long long infectious;
  long long recovered;
};

struct IntegerState {
  long long susceptible;
  long long infectious;
  long long recovered;

  long long total() const { return susceptible + infectious + recovered; }
};

inline IntegerState to_integer_state(const StateVector& s) {
  return {static_cast<long long>(s.susceptible + 0.5), static_cast<long long>(s.infectious + 0.5),
          static_cast<long long>(s.recovered + 0.5)};
}

/// Exact Gillespie simulation of the SIR CTMC with rates a1 = beta*S*I
/// (infection) and a2 = alpha*I (recovery). Terminates when I hits 0 or time
/// passes t_end. Identical (params, initial, seed) reproduce the identical
/// event sequence bit for bit.
std::vector<EventRecord> gillespie_run(const EpidemicParameters& params, const IntegerState& initial,
                                       double t_end, RngSeed seed);

/// Piecewise-constant, right-continuous extraction: prevalence at time t is
/// the infectious count after the last event with event-time <= t.
Trajectory sample_daily(const std::vector<EventRecord>& events, const IntegerState& initial,
                        const TimeGrid& grid);

/// Total ever infected = I0 + number of infection events (the "final size").
long long final_size(const std::vector<EventRecord>& events, const IntegerState& initial);

/// Daily-sampled CTMC ensemble plus per-run final sizes.
struct Ensemble {
  std::vector<Trajectory> runs;
  std::vector<long long> final_sizes;
  EpidemicParameters params;
  RngSeed seed;
  int count = 0;
};

/// Run `count` independent trajectories; run j uses stream id = seed.stream + j,
/// so the result is bit-identical regardless of worker count.
Ensemble run_ensemble(const EpidemicParameters& params, const IntegerState& initial,
                      const TimeGrid& grid, int count, RngSeed seed, int threads = 0);

/// Drop runs with final size below the threshold (sensitivity-analysis flag;
/// with the default scenario I0 = 10 nothing is ever dropped).
Ensemble filter_extinct(Ensemble ensemble, long long min_final_size = 10);

}  // namespace epiident
