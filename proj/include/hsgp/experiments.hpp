#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsgp/verify.hpp"

namespace hsgp {

// Bad or missing configuration. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a(const std::string& bytes);
std::string hash_hex(const std::string& bytes);

// Written next to every command's outputs; reruns with the same config and
// seed reproduce every file hash and differ only in wall_clock_seconds.
struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::string version;
  std::uint64_t seed = 0;
  double wall_clock_seconds = 0.0;
  std::map<std::string, std::string> file_hashes;
  std::vector<CheckResult> checks;
};

void to_json(nlohmann::json& out, const RunManifest& m);
void from_json(const nlohmann::json& in, RunManifest& m);

// Full command-line entry: parses argv, loads and validates the JSON config,
// runs the subcommand, writes outputs + manifest. Returns the process exit
// code: 0 success, 2 config error, 3 verification failure, 4 numerical
// failure.
int run_cli(int argc, const char* const* argv);

int cmd_instance(const nlohmann::json& config, const std::string& out_dir);
int cmd_verify(const nlohmann::json& config, const std::string& out_dir);
int cmd_mig(const nlohmann::json& config, const std::string& out_dir);
int cmd_regret(const nlohmann::json& config, const std::string& out_dir);
int cmd_certify(const nlohmann::json& config, const std::string& out_dir);

}  // namespace hsgp
