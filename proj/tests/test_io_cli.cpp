#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "epiident/gillespie.hpp"
#include "epiident/io.hpp"
#include "test_helpers.hpp"

using namespace epiident;
using epiident::test::make_scenario;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / "epiident_test_io";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("trajectory CSV round trip with 6-decimal times") {
  const auto sc = make_scenario(0.1, 0.0004);
  const auto sol = test::solve(sc);
  const fs::path p = temp_dir() / "traj.csv";
  write_trajectory_csv(p, sol.trajectory);
  const std::string text = slurp(p);
  CHECK(text.rfind("t,I\n", 0) == 0);
  CHECK(text.find("0.000000,10.000000") != std::string::npos);
  CHECK(text.find("\r\n") == std::string::npos);  // LF endings only
  const Trajectory back = read_trajectory_csv(p);
  REQUIRE(back.prevalence.size() == sol.trajectory.prevalence.size());
  for (std::size_t k = 0; k < back.prevalence.size(); ++k)
    CHECK(back.prevalence[k] == doctest::Approx(sol.trajectory.prevalence[k]).epsilon(1e-6));
}

TEST_CASE("residual bank files round-trip losslessly") {
  const auto sc = make_scenario(0.1, 0.0004);
  const auto sol = test::solve(sc);
  const Ensemble ens =
      run_ensemble(sc.params, to_integer_state(sc.initial), sc.grid, 80, {1, 0}, 0);
  const ResidualBank bank = build_residual_bank(ens.runs, sol.trajectory, 10, "roundtrip");
  const fs::path p = temp_dir() / "bank.csv";
  write_residual_bank(p, bank);
  const ResidualBank back = read_residual_bank(p);
  CHECK(back.scenario_label() == "roundtrip");
  REQUIRE(back.bins() == bank.bins());
  REQUIRE(back.bin_edges().size() == bank.bin_edges().size());
  for (std::size_t k = 0; k < bank.bin_edges().size(); ++k)
    CHECK(back.bin_edges()[k] == bank.bin_edges()[k]);
  for (int b = 0; b < bank.bins(); ++b) {
    for (Phase ph : {Phase::pre, Phase::post}) {
      const auto& s1 = bank.stratum(b, ph);
      const auto& s2 = back.stratum(b, ph);
      REQUIRE(s1.size() == s2.size());
      for (std::size_t k = 0; k < s1.size(); ++k) CHECK(s1[k] == s2[k]);
    }
  }
}

TEST_CASE("warp distribution files round-trip losslessly") {
  std::vector<WarpSample> samples;
  RandomStream rng({2, 0});
  for (int k = 0; k < 50; ++k) samples.push_back({1.0 + 0.1 * rng.normal(), 2.0 * rng.normal()});
  const WarpDistribution dist = fit_warp_distribution(samples);
  const fs::path p = temp_dir() / "warp.csv";
  write_warp_distribution(p, dist);
  const WarpDistribution back = read_warp_distribution(p);
  REQUIRE(back.samples().size() == dist.samples().size());
  for (std::size_t k = 0; k < dist.samples().size(); ++k) {
    CHECK(back.samples()[k].amplitude == dist.samples()[k].amplitude);
    CHECK(back.samples()[k].shift == dist.samples()[k].shift);
  }
  CHECK(back.bandwidth_amplitude() == doctest::Approx(dist.bandwidth_amplitude()).epsilon(1e-12));
}

TEST_CASE("manifest JSON has stable key order") {
  RunManifest m;
  m.command_line = "epiident test";
  m.scenario_hashes.emplace_back("s1", fnv1a_hex("abc"));
  m.started_at = "2024-01-01T00:00:00Z";
  m.steps.push_back({"demo", 3});
  const fs::path p = temp_dir() / "manifest.json";
  m.write(p);
  const std::string text = slurp(p);
  const auto cmd_pos = text.find("command_line");
  const auto seed_pos = text.find("master_seed");
  const auto prng_pos = text.find("prng");
  REQUIRE(cmd_pos != std::string::npos);
  CHECK(cmd_pos < seed_pos);
  CHECK(seed_pos < prng_pos);
}

TEST_CASE("fnv1a hash is stable") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == fnv1a_hex("a"));
  CHECK(fnv1a_hex("a") != fnv1a_hex("b"));
}

#ifndef EPIIDENT_CLI_PATH
#define EPIIDENT_CLI_PATH ""
#endif

TEST_CASE("CLI determinism and exit codes") {
  const std::string cli = EPIIDENT_CLI_PATH;
  REQUIRE(!cli.empty());
  const fs::path work = temp_dir() / "cli";
  fs::remove_all(work);
  fs::create_directories(work);

  SUBCASE("scenarios list exits 0 with 16 rows") {
    const std::string cmd = cli + " scenarios list --format csv > " + (work / "grid.csv").string();
    CHECK(std::system(cmd.c_str()) == 0);
    std::ifstream in(work / "grid.csv");
    int lines = 0;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ++lines;
    CHECK(lines == 17);  // header + 16
  }

  SUBCASE("invalid flag value exits 1") {
    const int rc = std::system((cli + " coverage --j 0 --scenarios 0 --m 60 --out " +
                                (work / "bad").string() + " 2>/dev/null")
                                   .c_str());
    CHECK(WEXITSTATUS(rc) == 1);
  }

  SUBCASE("unknown flag exits 1") {
    const int rc = std::system((cli + " scenarios list --bogus 2>/dev/null").c_str());
    CHECK(WEXITSTATUS(rc) == 1);
  }

  SUBCASE("identify runs are byte-identical across reruns and thread counts") {
    const std::string base = cli + " --seed 42 identify --method gaussian:0.1 --m 60 ";
    const fs::path d1 = work / "run1", d2 = work / "run2";
    CHECK(std::system((base + "--out " + d1.string() + " > /dev/null").c_str()) == 0);
    CHECK(std::system((cli + " --seed 42 --threads 1 identify --method gaussian:0.1 --m 60 --out " +
                       d2.string() + " > /dev/null")
                          .c_str()) == 0);
    CHECK(slurp(d1 / "estimates.csv") == slurp(d2 / "estimates.csv"));
    CHECK(!slurp(d1 / "estimates.csv").empty());
  }
}
