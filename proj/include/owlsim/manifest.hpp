#pragma once

#include <chrono>
#include <cstdio>
#include <ctime>
#include <string>
#include <vector>

#include "json.hpp"
#include "owlsim/config.hpp"
#include "owlsim/scenario.hpp"
#include "owlsim/version.hpp"

namespace owlsim::manifest {

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Run manifest written next to every output set: tool identity, the fully
/// resolved configuration, the seed, and the produced files. Rerunning the
/// same subcommand against the embedded config reproduces the outputs
/// byte for byte (the manifest itself differs only in its timestamp).
inline std::string manifest_json(const scenario::ScenarioConfig& cfg,
                                 const std::string& command,
                                 const std::vector<std::string>& outputs,
                                 const scenario::SweepResult* sweep = nullptr) {
  nlohmann::json j;
  j["tool"] = kToolName;
  j["version"] = kVersion;
  j["command"] = command;
  j["timestamp_utc"] = utc_timestamp();
  j["master_seed"] = cfg.master_seed;
  nlohmann::json jcfg = nlohmann::json::object();
  for (const auto& [k, v] : config::to_key_values(cfg)) jcfg[k] = v;
  j["config"] = jcfg;
  j["outputs"] = outputs;
  if (sweep) {
    nlohmann::json skips = nlohmann::json::array();
    for (const auto& s : sweep->skips) {
      nlohmann::json e;
      e["param"] = s.param;
      e["scheme"] = s.scheme.label();
      e["groups"] = s.scheme.groups;
      e["reason"] = s.reason;
      skips.push_back(e);
    }
    j["skipped_points"] = skips;
  }
  return j.dump(2) + "\n";
}

}  // namespace owlsim::manifest
