#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsgp/experiments.hpp"

using namespace hsgp;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "hsgp_test_experiments" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json slurp_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

std::vector<std::vector<std::string>> csv_rows(const std::string& bytes) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream lines(bytes);
  std::string line;
  while (std::getline(lines, line)) {
    std::vector<std::string> cells;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hardsphere-gp");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path write_config(const fs::path& dir, const nlohmann::json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump();
  return p;
}

const nlohmann::json kRegretConfig = {
    {"algorithm", "gp_ucb"}, {"d", 1},      {"sigma", 0.05}, {"B", 1.0},
    {"delta", 0.25},         {"T", {60}},   {"trials", 3},   {"seed", 11}};

}  // namespace

TEST_CASE("config validation names the offending field") {
  const fs::path dir = fresh_dir("validation");
  CHECK_THROWS_WITH_AS(cmd_instance({{"d", 1}, {"eps", 0.5}}, dir.string()),
                       "field 'N': expected a nonempty integer array", ConfigError);
  CHECK_THROWS_WITH_AS(cmd_instance({{"d", 1}, {"eps", "big"}, {"N", {5}}}, dir.string()),
                       "field 'eps': expected a number", ConfigError);
  CHECK_THROWS_WITH_AS(
      cmd_instance({{"d", 99}, {"eps", 0.5}, {"N", {5}}}, dir.string()),
      "field 'd': value 99 outside [1, 16]", ConfigError);
  CHECK_THROWS_WITH_AS(cmd_regret({{"algorithm", "sgd"}}, dir.string()),
                       "field 'algorithm': unknown algorithm: sgd", ConfigError);
  const nlohmann::json cert = {{"algorithm", "gp_ucb"}, {"d", 1}, {"sigma", 0.05}};
  CHECK_THROWS_AS(cmd_certify(cert, dir.string()), ConfigError);
}

TEST_CASE("run_cli maps failures to exit codes") {
  const fs::path dir = fresh_dir("cli_codes");
  const fs::path good = write_config(dir, {{"d", 1}, {"eps", 0.5}, {"N", {4}}, {"grid", 200}});
  CHECK(cli({"instance", "--config", good.string(), "--out", (dir / "ok").string()}) == 0);
  CHECK(cli({"instance", "--config", (dir / "absent.json").string()}) == 2);

  const fs::path broken = dir / "broken.json";
  std::ofstream(broken) << "not json";
  CHECK(cli({"verify", "--config", broken.string()}) == 2);

  const fs::path incomplete = write_config(dir, {{"d", 1}, {"eps", 0.5}});
  CHECK(cli({"instance", "--config", incomplete.string()}) == 2);
  CHECK(cli({"instance"}) == 2);
}

TEST_CASE("instance emits delta-like profiles with peak 2 eps") {
  const fs::path dir = fresh_dir("instance");
  const nlohmann::json config = {
      {"d", 1}, {"eps", 0.5}, {"N", {5, 10, 20}}, {"grid", 720}, {"seed", 7}};
  REQUIRE(cmd_instance(config, dir.string()) == 0);

  const nlohmann::json cls = slurp_json(dir / "instance_class.json");
  REQUIRE(cls.at("profiles").size() == 3);
  double prev_width = 10.0;
  for (const auto& profile : cls.at("profiles")) {
    CHECK(profile.at("peak").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    const double width = profile.at("width").get<double>();
    const int N = profile.at("N").get<int>();
    CHECK(width < prev_width);
    CHECK(width * N > 1.2);
    CHECK(width * N < 2.5);
    prev_width = width;
  }

  const auto rows = csv_rows(slurp(dir / "instance_d1_N10.csv"));
  REQUIRE(rows.size() == 722);
  CHECK(rows[0] == std::vector<std::string>{"geodesic_angle", "f_value"});
  CHECK(std::stod(rows[1][1]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(std::stod(rows[361][1])) < 0.5);
}

TEST_CASE("verify subcommand reports every check and fails under fault injection") {
  const fs::path dir = fresh_dir("verify_ok");
  REQUIRE(cmd_verify({{"seed", 1}}, dir.string()) == 0);
  const nlohmann::json report = slurp_json(dir / "verify_report.json");
  CHECK(report.at("all_passed").get<bool>());
  CHECK(report.at("checks").size() >= 20);
  for (const auto& c : report.at("checks")) CHECK(c.at("passed").get<bool>());

  std::vector<CheckResult> parsed;
  report.at("checks").get_to(parsed);
  const nlohmann::json reserialized = {{"all_passed", all_passed(parsed)}, {"checks", parsed}};
  CHECK(reserialized == report);

  const fs::path fdir = fresh_dir("verify_fault");
  CHECK(cmd_verify({{"fault_scale", 1.01}}, fdir.string()) == 3);
  const nlohmann::json freport = slurp_json(fdir / "verify_report.json");
  CHECK_FALSE(freport.at("all_passed").get<bool>());
  int failed = 0;
  for (const auto& c : freport.at("checks"))
    if (!c.at("passed").get<bool>()) ++failed;
  CHECK(failed == 1);
}

TEST_CASE("mig rows respect the spectral bound") {
  const fs::path dir = fresh_dir("mig");
  const nlohmann::json config = {
      {"d", 1}, {"noise_var", 0.25}, {"T", {8, 32, 128}}, {"candidates", 256}, {"seed", 3}};
  REQUIRE(cmd_mig(config, dir.string()) == 0);
  const auto rows = csv_rows(slurp(dir / "mig_d1.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0][0] == "T");
  double prev_gain = 0.0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double gain = std::stod(rows[r][1]);
    const double bound = std::stod(rows[r][2]);
    CHECK(gain > prev_gain);
    CHECK(gain <= bound);
    CHECK(std::stod(rows[r][4]) > 0.0);
    prev_gain = gain;
  }
}

TEST_CASE("mig default horizon grid keeps the theory ratio in a factor-2 band") {
  const fs::path dir = fresh_dir("mig_default");
  REQUIRE(cmd_mig({{"d", 1}, {"seed", 3}}, dir.string()) == 0);
  const auto rows = csv_rows(slurp(dir / "mig_d1.csv"));
  REQUIRE(rows.size() == 5);
  double lo = 1e300, hi = 0.0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double ratio = std::stod(rows[r][4]);
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
    CHECK(std::stod(rows[r][1]) <= std::stod(rows[r][2]));
  }
  CHECK(hi / lo <= 2.0);
}

TEST_CASE("regret traces cover every trial and count all queries") {
  const fs::path dir = fresh_dir("regret");
  REQUIRE(cmd_regret(kRegretConfig, dir.string()) == 0);

  const auto summary = csv_rows(slurp(dir / "regret_summary.csv"));
  REQUIRE(summary.size() == 2);
  const int members = std::stoi(summary[1][2]);
  const double eps = std::stod(summary[1][1]);
  CHECK(members >= 2);
  CHECK(eps > 0.0);
  CHECK(eps < 0.5);

  const auto rows = csv_rows(slurp(dir / "regret_T60.csv"));
  REQUIRE(rows.size() == 4);
  REQUIRE(rows[0].size() == static_cast<std::size_t>(5 + members));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    CHECK(std::stoi(rows[r][0]) == 60);
    CHECK(std::stoi(rows[r][1]) == static_cast<int>(r) - 1);
    const int worst = std::stoi(rows[r][2]);
    CHECK(worst >= 0);
    CHECK(worst < members);
    CHECK(std::stod(rows[r][3]) >= 0.5 * 60 * eps);
    long long total = 0;
    for (int k = 0; k < members; ++k) total += std::stoll(rows[r][5 + k]);
    CHECK(total == 60);
  }
}

TEST_CASE("certify emits one row per pair and a self pair never certifies") {
  const fs::path dir = fresh_dir("certify");
  const nlohmann::json config = {{"algorithm", "gp_ucb"},
                                 {"d", 1},
                                 {"sigma", 0.05},
                                 {"B", 1.0},
                                 {"eps", 0.08},
                                 {"delta", 0.25},
                                 {"T", 80},
                                 {"trials", 40},
                                 {"event", "report_in_region"},
                                 {"pairs", {{0, 1}, {1, 1}}},
                                 {"seed", 99}};
  REQUIRE(cmd_certify(config, dir.string()) == 0);

  const auto rows = csv_rows(slurp(dir / "certify.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][9] == "certified");
  CHECK(rows[2][9] == "premises not met");

  const nlohmann::json reports = slurp_json(dir / "certify_report.json");
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].at("verdict").get<std::string>() == "certified");
  CHECK(reports[0].at("lhs").get<double>() >= reports[0].at("rhs").get<double>());
  CHECK(reports[1].at("verdict").get<std::string>() == "premises not met");
}

TEST_CASE("reruns with one config and seed are byte-identical") {
  const fs::path a = fresh_dir("rerun_a");
  const fs::path b = fresh_dir("rerun_b");
  REQUIRE(cmd_regret(kRegretConfig, a.string()) == 0);
  REQUIRE(cmd_regret(kRegretConfig, b.string()) == 0);
  CHECK(slurp(a / "regret_T60.csv") == slurp(b / "regret_T60.csv"));
  CHECK(slurp(a / "regret_summary.csv") == slurp(b / "regret_summary.csv"));

  const nlohmann::json ma = slurp_json(a / "regret_manifest.json");
  const nlohmann::json mb = slurp_json(b / "regret_manifest.json");
  CHECK(ma.at("file_hashes") == mb.at("file_hashes"));
  CHECK(ma.at("config_hash") == mb.at("config_hash"));

  nlohmann::json reseeded = kRegretConfig;
  reseeded["seed"] = 12;
  const fs::path c = fresh_dir("rerun_c");
  REQUIRE(cmd_regret(reseeded, c.string()) == 0);
  CHECK(slurp(a / "regret_T60.csv") != slurp(c / "regret_T60.csv"));
}

TEST_CASE("manifest hashes match the bytes on disk") {
  const fs::path dir = fresh_dir("manifest");
  const fs::path config = write_config(dir, {{"d", 1}, {"eps", 0.5}, {"N", {6}}, {"grid", 300}});
  REQUIRE(cli({"instance", "--config", config.string(), "--out", (dir / "out").string(),
               "--seed", "5"}) == 0);

  RunManifest m = slurp_json(dir / "out" / "instance_manifest.json").get<RunManifest>();
  CHECK(m.subcommand == "instance");
  CHECK(m.seed == 5);
  CHECK(m.version == kVersion);
  CHECK(m.wall_clock_seconds >= 0.0);
  REQUIRE(m.file_hashes.size() == 2);
  for (const auto& [name, hash] : m.file_hashes)
    CHECK(hash == hash_hex(slurp(dir / "out" / name)));

  nlohmann::json inlined = {{"d", 1}, {"eps", 0.5}, {"N", {6}}, {"grid", 300}, {"seed", 5},
                            {"out", "somewhere/else"}};
  nlohmann::json canon = inlined;
  canon.erase("out");
  CHECK(m.config_hash == hash_hex(canon.dump()));
}
