#pragma once

#include <string>
#include <vector>

#include "epiident/types.hpp"

namespace epiident {

// Scenario defaults used by the shipped grid. The initial number of
// infectious individuals is configurable everywhere; 10 is the value that
// reproduces the reference tables.
inline constexpr double kDefaultScenarioI0 = 10.0;

struct Scenario {
  std::string label;
  EpidemicParameters params;
  TimeGrid grid;
  StateVector initial;
};

/// The 16 representative (alpha, beta) pairs, sorted by increasing R0. Betas
/// are quoted for N = 1000 and rescaled by 1000/N for other population sizes
/// so that every R0 is preserved.
std::vector<Scenario> paper_grid(double population, double initial_infectious = kDefaultScenarioI0,
                                 double horizon = 150.0);

/// Render a scenario as the plain-text key/value document used on disk.
std::string scenario_to_kv(const Scenario& s);
Scenario scenario_from_kv(const std::string& text);

}  // namespace epiident
