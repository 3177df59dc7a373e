#include "hsgp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "hsgp/bandit.hpp"
#include "hsgp/errors.hpp"
#include "hsgp/gp_engine.hpp"
#include "hsgp/hard_instances.hpp"
#include "hsgp/mercer.hpp"
#include "hsgp/parallel.hpp"
#include "hsgp/rng.hpp"
#include "hsgp/sphere_geometry.hpp"

namespace hsgp {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(const std::string& bytes) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

void to_json(nlohmann::json& out, const RunManifest& m) {
  out = nlohmann::json{{"subcommand", m.subcommand}, {"config_hash", m.config_hash},
                       {"version", m.version},       {"seed", m.seed},
                       {"wall_clock_seconds", m.wall_clock_seconds},
                       {"file_hashes", m.file_hashes}, {"checks", m.checks}};
}

void from_json(const nlohmann::json& in, RunManifest& m) {
  in.at("subcommand").get_to(m.subcommand);
  in.at("config_hash").get_to(m.config_hash);
  in.at("version").get_to(m.version);
  in.at("seed").get_to(m.seed);
  in.at("wall_clock_seconds").get_to(m.wall_clock_seconds);
  in.at("file_hashes").get_to(m.file_hashes);
  in.at("checks").get_to(m.checks);
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double need_number(const nlohmann::json& j, const std::string& field, double lo, double hi) {
  if (!j.contains(field) || !j.at(field).is_number())
    throw ConfigError("field '" + field + "': expected a number");
  const double v = j.at(field).get<double>();
  if (!(v >= lo && v <= hi))
    throw ConfigError("field '" + field + "': value " + fmt_double(v) + " outside [" +
                      fmt_double(lo) + ", " + fmt_double(hi) + "]");
  return v;
}

int need_integer(const nlohmann::json& j, const std::string& field, int lo, int hi) {
  if (!j.contains(field) || !j.at(field).is_number_integer())
    throw ConfigError("field '" + field + "': expected an integer");
  const auto v = j.at(field).get<std::int64_t>();
  if (v < lo || v > hi)
    throw ConfigError("field '" + field + "': value " + std::to_string(v) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

int optional_integer(const nlohmann::json& j, const std::string& field, int fallback,
                     int lo, int hi) {
  if (!j.contains(field)) return fallback;
  return need_integer(j, field, lo, hi);
}

double optional_number(const nlohmann::json& j, const std::string& field, double fallback,
                       double lo, double hi) {
  if (!j.contains(field)) return fallback;
  return need_number(j, field, lo, hi);
}

std::vector<int> need_integer_list(const nlohmann::json& j, const std::string& field,
                                   int lo, int hi) {
  if (!j.contains(field) || !j.at(field).is_array() || j.at(field).empty())
    throw ConfigError("field '" + field + "': expected a nonempty integer array");
  std::vector<int> out;
  for (const auto& e : j.at(field)) {
    if (!e.is_number_integer())
      throw ConfigError("field '" + field + "': expected integers");
    const auto v = e.get<std::int64_t>();
    if (v < lo || v > hi)
      throw ConfigError("field '" + field + "': entry " + std::to_string(v) + " outside [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::uint64_t config_seed(const nlohmann::json& j) {
  if (!j.contains("seed")) return 1;
  if (!j.at("seed").is_number_integer())
    throw ConfigError("field 'seed': expected an integer");
  return j.at("seed").get<std::uint64_t>();
}

Algorithm need_algorithm(const nlohmann::json& j) {
  if (!j.contains("algorithm") || !j.at("algorithm").is_string())
    throw ConfigError("field 'algorithm': expected a string");
  try {
    return algorithm_from_string(j.at("algorithm").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("field 'algorithm': ") + e.what());
  }
}

// Accumulates CSV text (classic locale, '\n' rows) and remembers bytes so the
// manifest can store every file's hash.
class OutputSet {
 public:
  explicit OutputSet(std::string dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& bytes) {
    std::ofstream out(std::filesystem::path(dir_) / name, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + name);
    out << bytes;
    hashes_[name] = hash_hex(bytes);
  }

  void write_manifest(const std::string& subcommand, const nlohmann::json& config,
                      std::uint64_t seed, double wall_seconds,
                      std::vector<CheckResult> checks = {}) {
    RunManifest m;
    m.subcommand = subcommand;
    nlohmann::json canon = config;
    canon.erase("out");
    m.config_hash = hash_hex(canon.dump());
    m.version = kVersion;
    m.seed = seed;
    m.wall_clock_seconds = wall_seconds;
    m.file_hashes = hashes_;
    m.checks = std::move(checks);
    const nlohmann::json j = m;
    std::ofstream out(std::filesystem::path(dir_) / (subcommand + "_manifest.json"),
                      std::ios::binary);
    out << j.dump(2) << '\n';
  }

 private:
  std::string dir_;
  std::map<std::string, std::string> hashes_;
};

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

}  // namespace

int cmd_instance(const nlohmann::json& config, const std::string& out_dir) {
  Timer timer;
  const int d = need_integer(config, "d", 1, 16);
  const double eps = need_number(config, "eps", 1e-12, 100.0);
  const double theta = optional_number(config, "theta", 1.0, 1e-6, 1e6);
  const int grid = optional_integer(config, "grid", 720, 100, 1000000);
  const std::vector<int> degrees = need_integer_list(config, "N", 1, 100000);
  const std::uint64_t seed = config_seed(config);

  OutputSet out(out_dir);
  const SpherePoint pole = make_point([&] {
    std::vector<double> x(d + 1, 0.0);
    x[0] = 1.0;
    return x;
  }());

  nlohmann::json profiles = nlohmann::json::array();
  for (int N : degrees) {
    const HardFunction f{pole, eps, N, KernelParams{d, theta}};
    std::ostringstream csv;
    csv << "geodesic_angle,f_value\n";
    for (int k = 0; k <= grid; ++k) {
      const double angle = 3.14159265358979323846 * k / grid;
      csv << fmt_double(angle) << ',' << fmt_double(f.evaluate_cos(std::cos(angle))) << '\n';
    }
    out.write("instance_d" + std::to_string(d) + "_N" + std::to_string(N) + ".csv", csv.str());
    profiles.push_back({{"N", N},
                        {"peak", f.peak()},
                        {"width", measure_width(f, std::max(1000, 50 * N))}});
  }

  const nlohmann::json cls = {{"d", d}, {"eps", eps}, {"theta", theta}, {"profiles", profiles}};
  out.write("instance_class.json", cls.dump(2) + "\n");
  out.write_manifest("instance", config, seed, timer.seconds());
  return 0;
}

int cmd_verify(const nlohmann::json& config, const std::string& out_dir) {
  Timer timer;
  VerifyOptions options;
  options.seed = config_seed(config);
  options.fault_scale = optional_number(config, "fault_scale", 1.0, 1e-3, 1e3);

  const std::vector<CheckResult> checks = run_verification(options);
  OutputSet out(out_dir);
  const nlohmann::json report = {{"all_passed", all_passed(checks)}, {"checks", checks}};
  out.write("verify_report.json", report.dump(2) + "\n");
  out.write_manifest("verify", config, options.seed, timer.seconds(), checks);
  return all_passed(checks) ? 0 : 3;
}

int cmd_mig(const nlohmann::json& config, const std::string& out_dir) {
  Timer timer;
  const int d = need_integer(config, "d", 1, 8);
  const double theta = optional_number(config, "theta", 1.0, 1e-6, 1e6);
  const double noise_var = optional_number(config, "noise_var", 1.0, 1e-12, 1e6);
  std::vector<int> horizons = config.contains("T")
                                  ? need_integer_list(config, "T", 3, 1 << 20)
                                  : std::vector<int>{64, 256, 1024, 4096};
  std::sort(horizons.begin(), horizons.end());
  const int candidates = optional_integer(config, "candidates", std::max(4096, horizons.back()),
                                          horizons.back(), 1 << 22);
  const int degree = optional_integer(config, "spectrum_degree", 60, 20, 400);
  const std::uint64_t seed = config_seed(config);

  const KernelParams kp{d, theta};
  const EigenSpectrum& spec = build_spectrum(kp, degree);
  const auto pool = sample_uniform(d, candidates, derive_seed(seed, 1));
  const GreedyMigResult run = greedy_mig(horizons.back(), pool, theta, noise_var);

  std::ostringstream csv;
  csv << "T,greedy_gain,bound_minM,M_star,ratio_to_theory\n";
  for (int T : horizons) {
    const double gain = run.gain_curve[T - 1];
    const auto [bound, mstar] = mig_bound_min(T, spec, noise_var, d);
    const double lnT = std::log(static_cast<double>(T));
    const double theory = std::pow(lnT, d + 1) * std::pow(std::log(lnT), -d);
    csv << T << ',' << fmt_double(gain) << ',' << fmt_double(bound) << ',' << mstar << ','
        << fmt_double(gain / theory) << '\n';
  }
  OutputSet out(out_dir);
  out.write("mig_d" + std::to_string(d) + ".csv", csv.str());
  out.write_manifest("mig", config, seed, timer.seconds());
  return 0;
}

int cmd_regret(const nlohmann::json& config, const std::string& out_dir) {
  Timer timer;
  const Algorithm algorithm = need_algorithm(config);
  const int d = need_integer(config, "d", 1, 8);
  const double theta = optional_number(config, "theta", 1.0, 1e-6, 1e6);
  const double sigma = need_number(config, "sigma", 1e-9, 1e3);
  const double B = need_number(config, "B", 1e-9, 1e6);
  const double delta = need_number(config, "delta", 1e-9, 0.999);
  const std::vector<int> horizons = need_integer_list(config, "T", 1, 1 << 20);
  const int trials = need_integer(config, "trials", 1, 100000);
  const int pool_extra = optional_integer(config, "pool_extra", 64, 0, 1 << 20);
  const int degree = optional_integer(config, "spectrum_degree", 60, 20, 400);
  const double fixed_eps =
      config.contains("eps") ? need_number(config, "eps", 1e-12, B / 2) : -1.0;
  const std::uint64_t seed = config_seed(config);

  const KernelParams kp{d, theta};
  const EigenSpectrum& spec = build_spectrum(kp, degree);
  const EpisodeParams params{theta, optional_number(config, "beta_scale", 0.0, 0.0, 1e6)};

  OutputSet out(out_dir);
  std::ostringstream summary;
  summary << "T,eps,members,mean_worst_RT,min_worst_RT,scale_T_eps\n";

  for (int T : horizons) {
    const double eps =
        fixed_eps > 0.0 ? fixed_eps : eps_schedule(T, sigma, B, delta, d, spec, kp);
    const FunctionClass fc = build_class(eps, B, kp, spec, derive_seed(seed, 50));
    std::vector<SpherePoint> pool = fc.partition.centers.centers;
    for (const SpherePoint& p : sample_uniform(d, pool_extra, derive_seed(seed, 51)))
      pool.push_back(p);

    const int m = fc.size();
    std::vector<Environment> envs;
    envs.reserve(m);
    for (int k = 0; k < m; ++k)
      envs.push_back(make_environment(
          [fp = &fc.functions[k]](const SpherePoint& x) { return fp->evaluate(x); }, sigma,
          2.0 * fc.eps, d, derive_seed(seed, 60 + k)));

    struct TrialOutcome {
      double regret = 0.0;
      double simple = 0.0;
      std::vector<std::int64_t> counts;
    };
    std::vector<TrialOutcome> slots(static_cast<std::size_t>(trials) * m);
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
    for (int idx = 0; idx < trials * m; ++idx) {
      const int trial = idx / m;
      const int member = idx % m;
      const RegretTrace tr = run_episode(algorithm, envs[member], T, pool, params,
                                         derive_seed(seed, trial), &fc.partition);
      slots[idx] = TrialOutcome{tr.cumulative_regret, tr.simple_regret, tr.region_counts};
    }

    std::ostringstream csv;
    csv << "T,trial,worst_member,R_T,r_T";
    for (int r = 0; r < m; ++r) csv << ",n_" << r;
    csv << '\n';
    double mean_worst = 0.0, min_worst = 1e300;
    for (int trial = 0; trial < trials; ++trial) {
      int worst = 0;
      for (int k = 1; k < m; ++k)
        if (slots[trial * m + k].regret > slots[trial * m + worst].regret) worst = k;
      const TrialOutcome& best = slots[trial * m + worst];
      csv << T << ',' << trial << ',' << worst << ',' << fmt_double(best.regret) << ','
          << fmt_double(best.simple);
      for (std::int64_t n : best.counts) csv << ',' << n;
      csv << '\n';
      mean_worst += best.regret / trials;
      min_worst = std::min(min_worst, best.regret);
    }
    out.write("regret_T" + std::to_string(T) + ".csv", csv.str());
    summary << T << ',' << fmt_double(eps) << ',' << m << ',' << fmt_double(mean_worst) << ','
            << fmt_double(min_worst) << ',' << fmt_double(T * eps) << '\n';
  }

  out.write("regret_summary.csv", summary.str());
  out.write_manifest("regret", config, seed, timer.seconds());
  return 0;
}

int cmd_certify(const nlohmann::json& config, const std::string& out_dir) {
  Timer timer;
  const Algorithm algorithm = need_algorithm(config);
  const int d = need_integer(config, "d", 1, 8);
  const double theta = optional_number(config, "theta", 1.0, 1e-6, 1e6);
  const double sigma = need_number(config, "sigma", 1e-9, 1e3);
  const double B = need_number(config, "B", 1e-9, 1e6);
  const double eps = need_number(config, "eps", 1e-12, B / 2);
  const double delta = need_number(config, "delta", 1e-9, 1.0 / 3.0 - 1e-12);
  const int T = need_integer(config, "T", 1, 1 << 20);
  const int trials = need_integer(config, "trials", 30, 100000);
  const int degree = optional_integer(config, "spectrum_degree", 60, 20, 400);
  const std::uint64_t seed = config_seed(config);

  if (!config.contains("event") || !config.at("event").is_string())
    throw ConfigError("field 'event': expected a string");
  const std::string event_name = config.at("event").get<std::string>();
  CertifyEvent event;
  if (event_name == "report_in_region")
    event = CertifyEvent::report_in_region;
  else if (event_name == "half_queries_in_region")
    event = CertifyEvent::half_queries_in_region;
  else
    throw ConfigError("field 'event': unknown event '" + event_name + "'");

  if (!config.contains("pairs") || !config.at("pairs").is_array() || config.at("pairs").empty())
    throw ConfigError("field 'pairs': expected a nonempty array of [i, j] pairs");
  std::vector<std::pair<int, int>> pairs;
  for (const auto& e : config.at("pairs")) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw ConfigError("field 'pairs': each entry must be [i, j] with integers");
    pairs.emplace_back(e[0].get<int>(), e[1].get<int>());
  }

  const KernelParams kp{d, theta};
  const EigenSpectrum& spec = build_spectrum(kp, degree);
  const FunctionClass fc = build_class(eps, B, kp, spec, derive_seed(seed, 50));
  for (const auto& [i, j] : pairs)
    if (i < 0 || i >= fc.size() || j < 0 || j >= fc.size())
      throw ConfigError("field 'pairs': index out of range for a class of size " +
                        std::to_string(fc.size()));

  const EpisodeParams params{theta, optional_number(config, "beta_scale", 0.0, 0.0, 1e6)};
  std::ostringstream csv;
  csv << "i,j,event,trials,p_f,p_f_tilde,lhs,rhs,premises_met,verdict\n";
  nlohmann::json reports = nlohmann::json::array();
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [i, j] = pairs[k];
    const CertificateReport rep = certify_change_of_measure(
        algorithm, fc, i, j, T, delta, trials, event, sigma, params, derive_seed(seed, 80 + k));
    csv << i << ',' << j << ',' << event_name << ',' << trials << ',' << fmt_double(rep.p_f)
        << ',' << fmt_double(rep.p_f_tilde) << ',' << fmt_double(rep.lhs) << ','
        << fmt_double(rep.rhs) << ',' << (rep.premises_met ? 1 : 0) << ',' << rep.verdict
        << '\n';
    nlohmann::json jr = rep;
    jr["i"] = i;
    jr["j"] = j;
    reports.push_back(jr);
  }

  OutputSet out(out_dir);
  out.write("certify.csv", csv.str());
  out.write("certify_report.json", reports.dump(2) + "\n");
  out.write_manifest("certify", config, seed, timer.seconds());
  return 0;
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"hard-instance construction and verification for GP bandits on the sphere"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  std::uint64_t seed_override = 0;

  const std::vector<std::string> names = {"instance", "verify", "mig", "regret", "certify"};
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config path")->required();
    sub->add_option("--seed", seed_override, "master seed override");
    sub->add_option("--out", out_override, "output directory override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + config_path);
    nlohmann::json config;
    try {
      config = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!config.is_object()) throw ConfigError("config root must be a JSON object");
    CLI::App* active = app.get_subcommands().front();
    if (active->count("--seed") > 0) config["seed"] = seed_override;
    const std::string out_dir =
        !out_override.empty() ? out_override
                              : (config.contains("out") && config.at("out").is_string()
                                     ? config.at("out").get<std::string>()
                                     : std::string("."));

    const std::string sub = active->get_name();
    if (sub == "instance") return cmd_instance(config, out_dir);
    if (sub == "verify") return cmd_verify(config, out_dir);
    if (sub == "mig") return cmd_mig(config, out_dir);
    if (sub == "regret") return cmd_regret(config, out_dir);
    return cmd_certify(config, out_dir);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const VerificationError& e) {
    std::fprintf(stderr, "verification failure: %s\n", e.what());
    return 3;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 4;
  }
}

}  // namespace hsgp
