#include "epiident/scenarios.hpp"

#include <array>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace epiident {

namespace {

// (alpha, beta at N=1000), in increasing-R0 order.
constexpr std::array<std::pair<double, double>, 16> kGridAt1000 = {{
    {0.33, 0.0004},
    {0.20, 0.0004},
    {0.33, 0.0008},
    {0.14, 0.0004},
    {0.10, 0.0004},
    {0.20, 0.0008},
    {0.07, 0.0004},
    {0.14, 0.0008},
    {0.20, 0.0012},
    {0.10, 0.0008},
    {0.20, 0.0016},
    {0.14, 0.0012},
    {0.07, 0.0008},
    {0.14, 0.0016},
    {0.10, 0.0012},
    {0.14, 0.0020},
}};

std::string format_label(double alpha, double beta_at_1000) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "a%.2f_b%.4f", alpha, beta_at_1000);
  return buf;
}

}  // namespace

std::vector<Scenario> paper_grid(double population, double initial_infectious, double horizon) {
  if (!(population >= 2.0)) throw std::invalid_argument("population must be at least 2");
  if (!(initial_infectious >= 0.0) || initial_infectious > population)
    throw std::invalid_argument("initial infectious count must lie in [0, N]");
  std::vector<Scenario> out;
  out.reserve(kGridAt1000.size());
  for (const auto& [alpha, beta1000] : kGridAt1000) {
    Scenario s;
    s.label = format_label(alpha, beta1000);
    s.params = {alpha, beta1000 * 1000.0 / population, population};
    s.grid = TimeGrid::daily(0.0, horizon);
    s.initial = {population - initial_infectious, initial_infectious, 0.0};
    out.push_back(std::move(s));
  }
  return out;
}

std::string scenario_to_kv(const Scenario& s) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "label = %s\nalpha = %.17g\nbeta = %.17g\npopulation = %.17g\n"
                "t_start = %.17g\nt_end = %.17g\ninitial_infectious = %.17g\n"
                "initial_recovered = %.17g\n",
                s.label.c_str(), s.params.alpha, s.params.beta, s.params.population,
                s.grid.t_start, s.grid.t_end, s.initial.infectious, s.initial.recovered);
  return buf;
}

Scenario scenario_from_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string v) {
      const auto a = v.find_first_not_of(" \t\r");
      const auto b = v.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw std::invalid_argument("scenario document missing key: " + key);
    return it->second;
  };
  Scenario s;
  s.label = need("label");
  s.params = {std::stod(need("alpha")), std::stod(need("beta")), std::stod(need("population"))};
  s.grid = TimeGrid::daily(std::stod(need("t_start")), std::stod(need("t_end")));
  const double i0 = std::stod(need("initial_infectious"));
  const double r0 = std::stod(need("initial_recovered"));
  s.initial = {s.params.population - i0 - r0, i0, r0};
  return s;
}

}  // namespace epiident
