#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace epiident {

/// Base class for all domain errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntegrationFailure : Error {
  double time;
  explicit IntegrationFailure(double t, const std::string& what)
      : Error("integration failure at t=" + std::to_string(t) + ": " + what), time(t) {}
};

struct NoPeakError : Error {
  NoPeakError() : Error("trajectory has no peak (all values zero)") {}
};

struct NoTakeoffError : Error {
  NoTakeoffError() : Error("stochastic run did not take off (final size < 10)") {}
};

struct UndefinedAcfError : Error {
  UndefinedAcfError() : Error("autocorrelation undefined for a constant series") {}
};

struct FitFailure : Error {
  using Error::Error;
};

struct DegenerateSampleError : Error {
  using Error::Error;
};

struct SampleTooSmallError : Error {
  using Error::Error;
};

struct RuleInapplicableError : Error {
  using Error::Error;
};

struct DegenerateEllipseError : Error {
  using Error::Error;
};

struct UndefinedAreError : Error {
  using Error::Error;
};

/// SIR rates and population size. R0 = beta * population / alpha.
struct EpidemicParameters {
  double alpha;       // recovery rate, 1/day
  double beta;        // transmission rate, 1/(person*day)
  double population;  // total population N, persons

  void validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw std::invalid_argument("alpha must be a positive finite real");
    if (!(beta > 0.0) || !std::isfinite(beta))
      throw std::invalid_argument("beta must be a positive finite real");
    if (!(population >= 2.0))
      throw std::invalid_argument("population must be at least 2");
  }
};

struct StateVector {
  double susceptible = 0.0;
  double infectious = 0.0;
  double recovered = 0.0;

  double total() const { return susceptible + infectious + recovered; }
};

/// Observation grid: strictly increasing times within [t_start, t_end].
struct TimeGrid {
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<double> times;

  static TimeGrid daily(double t_start, double t_end) {
    TimeGrid g;
    g.t_start = t_start;
    g.t_end = t_end;
    for (double t = t_start; t <= t_end + 1e-9; t += 1.0) g.times.push_back(t);
    return g;
  }

  std::size_t size() const { return times.size(); }

  void validate() const {
    if (!(t_start < t_end)) throw std::invalid_argument("t_start must be < t_end");
    if (times.empty()) throw std::invalid_argument("observation grid is empty");
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] < t_start - 1e-12 || times[i] > t_end + 1e-12)
        throw std::invalid_argument("observation time outside [t_start, t_end]");
      if (i > 0 && !(times[i] > times[i - 1]))
        throw std::invalid_argument("observation times must be strictly increasing");
    }
  }
};

enum class TrajectoryKind { ode, ctmc, synthetic };

inline const char* to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::ode: return "ode";
    case TrajectoryKind::ctmc: return "ctmc";
    default: return "synthetic";
  }
}

/// Prevalence series I(t) on an observation grid.
struct Trajectory {
  TimeGrid grid;
  std::vector<double> prevalence;
  TrajectoryKind kind = TrajectoryKind::ode;
};

}  // namespace epiident
