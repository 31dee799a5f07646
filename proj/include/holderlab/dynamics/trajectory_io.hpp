#pragma once

// A trajectory on disk: one HLD1 file per snapshot plus manifest.json.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "holderlab/dynamics/solver.hpp"
#include "holderlab/snapshot_io.hpp"

namespace holderlab {

inline nlohmann::ordered_json to_json(const SolverConfig& c) {
  nlohmann::ordered_json j;
  j["n"] = c.grid.n();
  j["dt"] = c.dt;
  j["nu"] = c.nu;
  j["alpha"] = c.alpha;
  j["t_end"] = c.t_end;
  j["dealias"] = "two_thirds";
  j["snapshot_stride"] = c.snapshot_stride;
  return j;
}

inline SolverConfig solver_config_from_json(const nlohmann::json& j) {
  SolverConfig c;
  c.grid = GridSpec(j.at("n").get<int>());
  c.dt = j.at("dt").get<double>();
  c.nu = j.at("nu").get<double>();
  c.alpha = j.at("alpha").get<double>();
  c.t_end = j.at("t_end").get<double>();
  detail::require(j.at("dealias").get<std::string>() == "two_thirds", "manifest: unknown dealias rule");
  c.snapshot_stride = j.at("snapshot_stride").get<int>();
  return c;
}

inline std::string snapshot_name(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%05zu.hld1", k);
  return buf;
}

inline void write_trajectory(const Trajectory& traj, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json m;
  m["format"] = "HLD1";
  m["config"] = to_json(traj.config);
  m["times"] = traj.times;
  auto files = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < traj.size(); ++k) {
    write_snapshot(dir / snapshot_name(k), traj.snapshots[k]);
    files.push_back(snapshot_name(k));
  }
  m["files"] = files;
  std::ofstream os(dir / "manifest.json");
  os << m.dump(2) << '\n';
  if (!os) throw Error("write_trajectory: cannot write manifest in " + dir.string());
}

inline Trajectory read_trajectory(const std::filesystem::path& dir) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw PreconditionError("read_trajectory: no manifest.json in " + dir.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("read_trajectory: malformed manifest: ") + e.what());
  }
  Trajectory t;
  t.config = solver_config_from_json(m.at("config"));
  t.times = m.at("times").get<std::vector<double>>();
  const auto files = m.at("files").get<std::vector<std::string>>();
  detail::require(files.size() == t.times.size(), "read_trajectory: times and files differ in length");
  for (const auto& f : files) t.snapshots.push_back(read_snapshot(dir / f));
  return t;
}

}  // namespace holderlab
