#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "epiident/scenarios.hpp"
#include "epiident/sir.hpp"

using namespace epiident;

TEST_CASE("16 scenarios with R0 from 1.21 to 14.29, sorted ascending") {
  const auto grid = paper_grid(1000.0);
  REQUIRE(grid.size() == 16);
  CHECK(basic_reproduction_number(grid.front().params) == doctest::Approx(1.21).epsilon(0.005));
  CHECK(basic_reproduction_number(grid.back().params) == doctest::Approx(14.29).epsilon(0.001));
  for (std::size_t k = 1; k < grid.size(); ++k)
    CHECK(basic_reproduction_number(grid[k].params) >=
          basic_reproduction_number(grid[k - 1].params) - 1e-12);
}

TEST_CASE("third-lowest R0 is 2.42 at (0.33, 0.0008)") {
  const auto grid = paper_grid(1000.0);
  CHECK(grid[2].params.alpha == doctest::Approx(0.33));
  CHECK(grid[2].params.beta == doctest::Approx(0.0008));
  CHECK(basic_reproduction_number(grid[2].params) == doctest::Approx(2.42).epsilon(0.005));
}

TEST_CASE("expected (alpha, beta) pairs at N=1000") {
  const auto grid = paper_grid(1000.0);
  const std::vector<std::pair<double, double>> expected = {
      {0.33, 0.0004}, {0.20, 0.0004}, {0.33, 0.0008}, {0.14, 0.0004},
      {0.10, 0.0004}, {0.20, 0.0008}, {0.07, 0.0004}, {0.14, 0.0008},
      {0.20, 0.0012}, {0.10, 0.0008}, {0.20, 0.0016}, {0.14, 0.0012},
      {0.07, 0.0008}, {0.14, 0.0016}, {0.10, 0.0012}, {0.14, 0.0020}};
  for (std::size_t k = 0; k < 16; ++k) {
    CHECK(grid[k].params.alpha == doctest::Approx(expected[k].first));
    CHECK(grid[k].params.beta == doctest::Approx(expected[k].second));
  }
}

TEST_CASE("beta rescaling preserves every R0 at N=2000") {
  const auto base = paper_grid(1000.0);
  const auto rescaled = paper_grid(2000.0);
  for (std::size_t k = 0; k < 16; ++k) {
    CHECK(rescaled[k].params.beta == doctest::Approx(base[k].params.beta / 2.0));
    CHECK(basic_reproduction_number(rescaled[k].params) ==
          doctest::Approx(basic_reproduction_number(base[k].params)));
  }
}

TEST_CASE("grid regeneration is idempotent and order-stable; labels unique") {
  const auto a = paper_grid(1000.0);
  const auto b = paper_grid(1000.0);
  std::set<std::string> labels;
  for (std::size_t k = 0; k < 16; ++k) {
    CHECK(a[k].label == b[k].label);
    CHECK(a[k].params.alpha == b[k].params.alpha);
    CHECK(a[k].params.beta == b[k].params.beta);
    labels.insert(a[k].label);
  }
  CHECK(labels.size() == 16);
}

TEST_CASE("every scenario R0 matches the reference values to 2 d.p.") {
  const std::vector<double> expected = {1.21, 2.00, 2.42, 2.86, 4.00, 4.00, 5.71, 5.71,
                                        6.00, 8.00, 8.00, 8.57, 11.43, 11.43, 12.00, 14.29};
  for (double n : {100.0, 1000.0, 10000.0}) {
    const auto grid = paper_grid(n);
    for (std::size_t k = 0; k < 16; ++k)
      CHECK(std::abs(basic_reproduction_number(grid[k].params) - expected[k]) < 0.005);
  }
}

TEST_CASE("scenario key/value document round-trips") {
  const auto grid = paper_grid(1000.0);
  const std::string text = scenario_to_kv(grid[4]);
  const Scenario back = scenario_from_kv(text);
  CHECK(back.label == grid[4].label);
  CHECK(back.params.alpha == grid[4].params.alpha);
  CHECK(back.params.beta == grid[4].params.beta);
  CHECK(back.initial.infectious == grid[4].initial.infectious);
  CHECK(back.grid.t_end == grid[4].grid.t_end);
}
