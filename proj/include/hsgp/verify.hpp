#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace hsgp {

inline constexpr const char* kVersion = "1.0.0";

// One named constructive check. The check passes when observed <= threshold;
// margin = threshold - observed is the measured slack.
struct CheckResult {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  // Multiplies the constructive reproducing-sum route inside the Dirichlet
  // cross-check only; 1.01 is the harness self-test that must fail.
  double fault_scale = 1.0;
};

// The full identity-verification suite across all modules, at desk-scale
// budgets. Deterministic given the options.
std::vector<CheckResult> run_verification(const VerifyOptions& options);

bool all_passed(const std::vector<CheckResult>& checks);

void to_json(nlohmann::json& out, const CheckResult& check);
void from_json(const nlohmann::json& in, CheckResult& check);

}  // namespace hsgp
