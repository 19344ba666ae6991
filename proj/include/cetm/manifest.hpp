#pragma once

// Run manifests: a JSON record written next to every artifact the CLI
// produces, naming the command, its configuration, input hashes and seed.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cetm/io.hpp"

#ifndef CETM_VERSION
#define CETM_VERSION "0.0.0"
#endif

namespace cetm {

struct RunManifest {
  explicit RunManifest(std::string cmd) : command(std::move(cmd)) {}

  std::string command;
  json config = json::object();
  std::map<std::string, std::string> input_hashes;  // path -> sha256
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  json timing = json::object();

  void add_input(const std::filesystem::path& p) { input_hashes[p.string()] = sha256_file(p); }
};

inline std::filesystem::path manifest_path(const std::filesystem::path& artifact) {
  auto p = artifact;
  p += ".manifest.json";
  return p;
}

inline json manifest_to_json(const RunManifest& m) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return json{{"command", m.command},       {"config", m.config},   {"inputs", m.input_hashes},
              {"seed", m.seed},             {"version", CETM_VERSION}, {"outputs", m.outputs},
              {"timing", m.timing},         {"created", stamp}};
}

// One manifest per output, each listing every output of the run.
inline void write_manifests(const RunManifest& m) {
  const std::string text = dump_json(manifest_to_json(m));
  for (const auto& out : m.outputs) atomic_write(manifest_path(out), text);
}

}  // namespace cetm
