#include "epiident/io.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace epiident {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw Error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path.string());
  return in;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "t,I\n";
  for (std::size_t k = 0; k < traj.prevalence.size(); ++k)
    out << fmt("%.6f", traj.grid.times[k]) << ',' << fmt("%.6f", traj.prevalence[k]) << '\n';
}

void write_trajectory_csv(const std::filesystem::path& path, const SirSolution& sol,
                          bool include_states) {
  if (!include_states) {
    write_trajectory_csv(path, sol.trajectory);
    return;
  }
  auto out = open_out(path);
  out << "t,I,S,R\n";
  const double dt = sol.dense_times[1] - sol.dense_times[0];
  for (std::size_t k = 0; k < sol.trajectory.prevalence.size(); ++k) {
    const double t = sol.trajectory.grid.times[k];
    const auto idx = static_cast<std::size_t>(std::llround((t - sol.dense_times.front()) / dt));
    const StateVector& s = sol.dense_states[idx];
    out << fmt("%.6f", t) << ',' << fmt("%.6f", s.infectious) << ',' << fmt("%.6f", s.susceptible)
        << ',' << fmt("%.6f", s.recovered) << '\n';
  }
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw Error("empty trajectory file: " + path.string());
  Trajectory traj;
  traj.kind = TrajectoryKind::synthetic;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < 2) throw Error("malformed trajectory row: " + line);
    traj.grid.times.push_back(std::stod(fields[0]));
    traj.prevalence.push_back(std::stod(fields[1]));
  }
  if (traj.grid.times.empty()) throw Error("trajectory file has no rows: " + path.string());
  traj.grid.t_start = traj.grid.times.front();
  traj.grid.t_end = traj.grid.times.back();
  return traj;
}

void write_ensemble_csv(const std::filesystem::path& path, const Ensemble& ensemble) {
  auto out = open_out(path);
  out << "run_id,t,I\n";
  for (std::size_t j = 0; j < ensemble.runs.size(); ++j) {
    const auto& run = ensemble.runs[j];
    for (std::size_t k = 0; k < run.prevalence.size(); ++k)
      out << j << ',' << fmt("%.6f", run.grid.times[k]) << ',' << fmt("%.6f", run.prevalence[k])
          << '\n';
  }
}

void write_residual_bank(const std::filesystem::path& csv_path, const ResidualBank& bank) {
  auto out = open_out(csv_path);
  out << "bin_index,phase,residual\n";
  for (int b = 0; b < bank.bins(); ++b) {
    for (Phase p : {Phase::pre, Phase::post}) {
      for (double r : bank.stratum(b, p))
        out << b << ',' << to_string(p) << ',' << fmt("%.17g", r) << '\n';
    }
  }
  nlohmann::ordered_json side;
  side["scenario"] = bank.scenario_label();
  side["bins"] = bank.bins();
  side["bin_edges"] = bank.bin_edges();
  side["warnings"] = bank.warnings();
  auto sout = open_out(std::filesystem::path(csv_path).replace_extension(".json"));
  sout << side.dump(2) << '\n';
}

ResidualBank read_residual_bank(const std::filesystem::path& csv_path) {
  const auto side_path = std::filesystem::path(csv_path).replace_extension(".json");
  nlohmann::json side;
  open_in(side_path) >> side;
  const auto edges = side.at("bin_edges").get<std::vector<double>>();
  const int bins = side.at("bins").get<int>();
  std::vector<std::vector<double>> pre(bins), post(bins);

  auto in = open_in(csv_path);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw Error("malformed residual bank row: " + line);
    const int b = std::stoi(fields[0]);
    auto& side_vec = fields[1] == "pre" ? pre : post;
    side_vec.at(b).push_back(std::stod(fields[2]));
  }
  return ResidualBank(edges, std::move(pre), std::move(post),
                      side.at("scenario").get<std::string>(),
                      side.at("warnings").get<std::vector<std::string>>());
}

void write_warp_distribution(const std::filesystem::path& csv_path, const WarpDistribution& dist) {
  auto out = open_out(csv_path);
  out << "a,dt\n";
  for (const auto& s : dist.samples())
    out << fmt("%.17g", s.amplitude) << ',' << fmt("%.17g", s.shift) << '\n';
  nlohmann::ordered_json side;
  side["bandwidth_a"] = dist.bandwidth_amplitude();
  side["bandwidth_dt"] = dist.bandwidth_shift();
  side["warnings"] = dist.warnings();
  auto sout = open_out(std::filesystem::path(csv_path).replace_extension(".json"));
  sout << side.dump(2) << '\n';
}

WarpDistribution read_warp_distribution(const std::filesystem::path& csv_path) {
  auto in = open_in(csv_path);
  std::string line;
  std::getline(in, line);
  std::vector<WarpSample> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) throw Error("malformed warp row: " + line);
    samples.push_back({std::stod(fields[0]), std::stod(fields[1])});
  }
  return WarpDistribution(std::move(samples));
}

void write_estimates_csv(const std::filesystem::path& path,
                         const std::vector<std::pair<double, double>>& estimates) {
  auto out = open_out(path);
  out << "dataset_id,alpha_hat,beta_hat\n";
  for (std::size_t i = 0; i < estimates.size(); ++i)
    out << i << ',' << fmt("%.17g", estimates[i].first) << ',' << fmt("%.17g", estimates[i].second)
        << '\n';
}

void RunManifest::write(const std::filesystem::path& path) const {
  nlohmann::ordered_json j;
  j["command_line"] = command_line;
  j["master_seed"] = master_seed;
  j["tool_version"] = tool_version;
  j["prng"] = {{"name", prng_name}, {"version", prng_version}};
  nlohmann::ordered_json hashes = nlohmann::ordered_json::object();
  for (const auto& [label, hash] : scenario_hashes) hashes[label] = hash;
  j["scenario_hashes"] = hashes;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  nlohmann::ordered_json steps_json = nlohmann::ordered_json::array();
  for (const auto& s : steps) steps_json.push_back({{"name", s.name}, {"exclusions", s.exclusions}});
  j["steps"] = steps_json;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace epiident
