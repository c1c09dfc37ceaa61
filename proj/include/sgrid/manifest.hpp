#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sgrid/util.hpp"

namespace sgrid {

// Provenance record written next to every command's outputs. Holds content
// digests so a rerun can be checked against an earlier one; the manifest
// itself carries timestamps and is not part of any byte-identity comparison.
struct RunManifest {
  std::string command;
  std::string status = "ok";
  std::string started_at;
  std::string finished_at;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::pair<std::string, std::string>> outputs;
  nlohmann::json extra = nlohmann::json::object();
};

inline RunManifest start_manifest(const std::string& command) {
  RunManifest m;
  m.command = command;
  m.started_at = iso8601_utc_now();
  return m;
}

inline void record_input(RunManifest& m, const std::string& path) {
  m.inputs.emplace_back(path, fnv1a64_hex(read_file(path)));
}

inline void write_output(RunManifest& m, const std::string& dir,
                         const std::string& name, const std::string& content) {
  write_file(dir + "/" + name, content);
  m.outputs.emplace_back(name, fnv1a64_hex(content));
}

inline void write_manifest(const std::string& dir, RunManifest& m) {
  m.finished_at = iso8601_utc_now();
  nlohmann::json j;
  j["tool"] = "sgrid";
  j["version"] = kVersion;
  j["command"] = m.command;
  j["status"] = m.status;
  j["started_at"] = m.started_at;
  j["finished_at"] = m.finished_at;
  auto digests = [](const std::vector<std::pair<std::string, std::string>>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [path, digest] : v)
      arr.push_back({{"path", path}, {"fnv1a64", digest}});
    return arr;
  };
  j["inputs"] = digests(m.inputs);
  j["outputs"] = digests(m.outputs);
  if (!m.extra.empty()) j["details"] = m.extra;
  write_file(dir + "/run_manifest.json", j.dump(2) + "\n");
}

}  // namespace sgrid
