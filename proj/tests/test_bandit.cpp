#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "hsgp/bandit.hpp"
#include "hsgp/errors.hpp"
#include "hsgp/hard_instances.hpp"
#include "hsgp/mercer.hpp"
#include "hsgp/rng.hpp"
#include "hsgp/sphere_geometry.hpp"

using namespace hsgp;

namespace {

constexpr double kPi = 3.14159265358979323846;

SpherePoint circle_point(double phi) {
  return make_point({std::cos(phi), std::sin(phi)});
}

const EigenSpectrum& spectrum40() {
  static const EigenSpectrum s = build_spectrum(KernelParams{1, 1.0}, 40);
  return s;
}

FunctionClass easy_class() {
  static const FunctionClass fc = build_class(0.08, 1.0, KernelParams{1, 1.0}, spectrum40(), 7);
  return fc;
}

std::vector<SpherePoint> pool_with_centers(const FunctionClass& fc, int extra,
                                           std::uint64_t seed) {
  std::vector<SpherePoint> pool = fc.partition.centers.centers;
  for (const SpherePoint& p : sample_uniform(1, extra, seed)) pool.push_back(p);
  return pool;
}

bool traces_equal(const RegretTrace& a, const RegretTrace& b) {
  if (a.observations != b.observations) return false;
  if (a.inst_regret != b.inst_regret) return false;
  if (a.cumulative_regret != b.cumulative_regret) return false;
  if (a.simple_regret != b.simple_regret) return false;
  if (a.region_counts != b.region_counts) return false;
  if (a.points.size() != b.points.size()) return false;
  for (std::size_t i = 0; i < a.points.size(); ++i)
    if (a.points[i].x != b.points[i].x) return false;
  return true;
}

}  // namespace

TEST_CASE("gaussian KL divergence") {
  CHECK(kl_gaussian(0.7, 0.7, 2.0) == 0.0);
  CHECK(kl_gaussian(0.1, 0.3, 1.0) == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(kl_gaussian(0.3, 0.1, 1.0) == kl_gaussian(0.1, 0.3, 1.0));
  CHECK(kl_gaussian(0.1, 0.3, 0.5) == doctest::Approx(0.08).epsilon(1e-14));
  CHECK_THROWS_AS(kl_gaussian(0.0, 1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(kl_gaussian(0.0, 1.0, -1.0), std::domain_error);
}

TEST_CASE("environment construction checks the claimed optimum") {
  const FunctionClass fc = easy_class();
  const HardFunction& member = fc.functions[0];
  CHECK_NOTHROW(make_environment(
      [&member](const SpherePoint& x) { return member.evaluate(x); }, 0.5,
      2.0 * fc.eps, 1, 11));
  CHECK_THROWS_AS(make_environment([](const SpherePoint&) { return 0.0; }, 0.5,
                                   -0.1, 1, 11),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_environment(SphereFunction{}, 0.5, 0.0, 1, 11),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_environment([](const SpherePoint&) { return 0.0; }, -0.5,
                                   0.0, 1, 11),
                  std::invalid_argument);

  CHECK(algorithm_from_string("gp_ucb") == Algorithm::gp_ucb);
  CHECK(algorithm_from_string(to_string(Algorithm::max_variance)) == Algorithm::max_variance);
  CHECK(to_string(Algorithm::random_search) == "random");
  CHECK_THROWS_AS(algorithm_from_string("thompson"), std::invalid_argument);
}

TEST_CASE("episode accounting on the degenerate zero objective") {
  const Environment env = make_environment(
      [](const SpherePoint&) { return 0.0; }, 0.3, 0.0, 1, 21);
  const FunctionClass fc = easy_class();
  const auto pool = pool_with_centers(fc, 32, 22);
  const EpisodeParams params{1.0, 0.0};

  const RegretTrace tr = run_episode(Algorithm::random_search, env, 200, pool,
                                     params, 5, &fc.partition);
  CHECK(tr.cumulative_regret == 0.0);
  CHECK(tr.simple_regret == 0.0);
  REQUIRE(tr.points.size() == 200);
  REQUIRE(tr.inst_regret.size() == 200);
  const double recomputed = std::accumulate(tr.inst_regret.begin(), tr.inst_regret.end(), 0.0);
  CHECK(recomputed == tr.cumulative_regret);
  CHECK(std::accumulate(tr.region_counts.begin(), tr.region_counts.end(), std::int64_t{0}) == 200);

  CHECK_THROWS_AS(run_episode(Algorithm::gp_ucb, env, 0, pool, params, 5), std::invalid_argument);
  CHECK_THROWS_AS(run_episode(Algorithm::gp_ucb, env, 5, {}, params, 5), std::invalid_argument);
}

TEST_CASE("same seed gives identical traces, fresh seed gives fresh noise") {
  const FunctionClass fc = easy_class();
  const HardFunction& member = fc.functions[0];
  const Environment env = make_environment(
      [&member](const SpherePoint& x) { return member.evaluate(x); }, 0.4,
      2.0 * fc.eps, 1, 23);
  const auto pool = pool_with_centers(fc, 24, 24);
  const EpisodeParams params{1.0, 0.0};

  for (Algorithm alg : {Algorithm::gp_ucb, Algorithm::max_variance, Algorithm::random_search}) {
    const RegretTrace a = run_episode(alg, env, 60, pool, params, 31, &fc.partition);
    const RegretTrace b = run_episode(alg, env, 60, pool, params, 31, &fc.partition);
    CHECK(traces_equal(a, b));
    const RegretTrace c = run_episode(alg, env, 60, pool, params, 32, &fc.partition);
    CHECK(!traces_equal(a, c));
  }
}

TEST_CASE("regret accounting invariants on a hard instance") {
  const FunctionClass fc = easy_class();
  const HardFunction& member = fc.functions[1];
  const Environment env = make_environment(
      [&member](const SpherePoint& x) { return member.evaluate(x); }, 0.25,
      2.0 * fc.eps, 1, 25);
  const auto pool = pool_with_centers(fc, 40, 26);

  const RegretTrace tr = run_episode(Algorithm::gp_ucb, env, 120, pool,
                                     EpisodeParams{1.0, 0.0}, 77, &fc.partition);
  double sum = 0.0;
  for (std::size_t t = 0; t < tr.points.size(); ++t) {
    const double inst = env.optimum - member.evaluate(tr.points[t]);
    CHECK(inst == tr.inst_regret[t]);
    sum += inst;
  }
  CHECK(sum == tr.cumulative_regret);
  CHECK(tr.simple_regret == env.optimum - member.evaluate(tr.reported));
  CHECK(std::accumulate(tr.region_counts.begin(), tr.region_counts.end(), std::int64_t{0}) == 120);

  // First pick ties across the pool and must resolve to index 0.
  CHECK(tr.points[0].x == pool[0].x);
}

TEST_CASE("noise-free play improves the final query") {
  const FunctionClass fc = easy_class();
  const HardFunction& member = fc.functions[0];
  const Environment env = make_environment(
      [&member](const SpherePoint& x) { return member.evaluate(x); }, 0.0,
      2.0 * fc.eps, 1, 27);
  const auto pool = pool_with_centers(fc, 48, 28);

  const RegretTrace tr = run_episode(Algorithm::gp_ucb, env, 40, pool,
                                     EpisodeParams{1.0, 0.0}, 9);
  CHECK(tr.inst_regret.back() <= tr.inst_regret.front());
  CHECK(tr.simple_regret <= fc.eps);
}

TEST_CASE("observation noise has the configured moments") {
  const double sigma = 0.7;
  const Environment env = make_environment(
      [](const SpherePoint&) { return 0.0; }, sigma, 0.0, 1, 29);
  const std::vector<SpherePoint> pool = {circle_point(0.0), circle_point(2.0)};
  const RegretTrace tr = run_episode(Algorithm::random_search, env, 10000, pool,
                                     EpisodeParams{1.0, 0.0}, 12345);
  double mean = 0.0, second = 0.0;
  for (double y : tr.observations) {
    mean += y;
    second += y * y;
  }
  mean /= tr.observations.size();
  second /= tr.observations.size();
  const double variance = second - mean * mean;
  CHECK(std::abs(mean) <= 4.0 * sigma / 100.0);
  CHECK(variance >= 0.9 * sigma * sigma);
  CHECK(variance <= 1.1 * sigma * sigma);
}

TEST_CASE("per-region KL suprema") {
  const FunctionClass fc = easy_class();
  const double sigma = 0.5;
  const int i = 0, j = fc.size() > 2 ? 2 : 1;
  const auto [f, f_tilde] = adversarial_pair(fc, i, j);

  const auto zeros = max_kl_per_region(f, f, fc.partition, sigma, 1000, 3);
  for (double v : zeros) CHECK(v == 0.0);

  const auto kl = max_kl_per_region(f, f_tilde, fc.partition, sigma, 3000, 4);
  REQUIRE(static_cast<int>(kl.size()) == fc.size());
  const double peak_kl = 8.0 * fc.eps * fc.eps / (sigma * sigma);
  CHECK(kl[j] == doctest::Approx(peak_kl).epsilon(1e-9));
  for (int r = 0; r < fc.size(); ++r) {
    CHECK(kl[r] >= 0.0);
    if (r != j) CHECK(kl[r] < kl[j]);
  }

  // Same summability as the sup-of-squares bound: the KL row sums to a
  // bounded multiple of eps^2 / sigma^2.
  double total = 0.0;
  for (double v : kl) total += v;
  CHECK(total * sigma * sigma / (2.0 * fc.eps * fc.eps) <= 12.0);

  CHECK_THROWS_AS(max_kl_per_region(f, f_tilde, fc.partition, sigma, 500, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(max_kl_per_region(f, f_tilde, fc.partition, 0.0, 1000, 4),
                  std::domain_error);

  const auto serial = max_kl_per_region_serial(f, f_tilde, fc.partition, sigma, 3000, 4);
  REQUIRE(serial.size() == kl.size());
  for (std::size_t r = 0; r < kl.size(); ++r) CHECK(serial[r] == kl[r]);
}

TEST_CASE("certifier validates input and recognizes identical measures") {
  const FunctionClass fc = easy_class();
  const EpisodeParams params{1.0, 0.0};
  CHECK_THROWS_AS(certify_change_of_measure(Algorithm::gp_ucb, fc, 0, 1, 30, 0.1, 10,
                                            CertifyEvent::report_in_region, 0.5, params, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(certify_change_of_measure(Algorithm::gp_ucb, fc, 0, 1, 30, 0.5, 40,
                                            CertifyEvent::report_in_region, 0.5, params, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(certify_change_of_measure(Algorithm::gp_ucb, fc, 0, fc.size(), 30, 0.1, 40,
                                            CertifyEvent::report_in_region, 0.5, params, 1),
                  std::out_of_range);

  const CertificateReport same = certify_change_of_measure(
      Algorithm::gp_ucb, fc, 1, 1, 40, 0.1, 32, CertifyEvent::report_in_region, 0.5, params, 5);
  for (double v : same.kl_sup) CHECK(v == 0.0);
  CHECK(same.lhs == 0.0);
  CHECK(same.verdict == "premises not met");
  CHECK(!same.premises_met);
}

TEST_CASE("certifier on a separable pair certifies and on random play declines") {
  const FunctionClass fc = easy_class();
  const EpisodeParams params{1.0, 0.0};
  const double sigma = 0.05;

  const CertificateReport good = certify_change_of_measure(
      Algorithm::gp_ucb, fc, 0, 1, 80, 0.25, 40, CertifyEvent::report_in_region,
      sigma, params, 99);
  CHECK(good.rhs == doctest::Approx(std::log(1.0 / 0.6)).epsilon(1e-12));
  CHECK(good.premises_met);
  CHECK(good.verdict == "certified");
  CHECK(good.lhs >= good.rhs);

  const CertificateReport half = certify_change_of_measure(
      Algorithm::gp_ucb, fc, 0, 1, 80, 0.25, 40,
      CertifyEvent::half_queries_in_region, sigma, params, 99);
  CHECK(half.verdict != "violated");

  const CertificateReport rnd = certify_change_of_measure(
      Algorithm::random_search, fc, 0, 1, 80, 0.05, 40,
      CertifyEvent::report_in_region, 2.5, params, 99);
  CHECK(rnd.verdict == "premises not met");

  nlohmann::json round = good;
  CHECK(round.at("verdict").get<std::string>() == "certified");
  CHECK(round.at("lhs").get<double>() == good.lhs);
  CHECK(round.at("premises_met").get<bool>());
}

TEST_CASE("worst-member regret is adversarial and reproducible") {
  const FunctionClass fc = easy_class();
  const auto pool = pool_with_centers(fc, 32, 41);
  const EpisodeParams params{1.0, 0.0};
  const double sigma = 0.5;
  const int T = 200;

  const auto worst = worst_member_regret(Algorithm::gp_ucb, fc, T, pool, params, sigma, 3, 55);
  REQUIRE(worst.size() == 3);
  // Queries cannot sit inside every member's optimal lobe at once, so the
  // adversarial member keeps at least half the steps at regret >= eps.
  for (double r : worst) CHECK(r >= 0.5 * T * fc.eps);
  for (double r : worst) CHECK(r <= 2.0 * fc.eps * T * (1.0 + 1e-9));

  const auto again = worst_member_regret(Algorithm::gp_ucb, fc, T, pool, params, sigma, 3, 55);
  CHECK(worst == again);
  const auto serial =
      worst_member_regret_serial(Algorithm::gp_ucb, fc, T, pool, params, sigma, 3, 55);
  CHECK(worst == serial);

  // A single-member run against member 0 matches a direct episode.
  FunctionClass solo = fc;
  solo.functions.resize(1);
  const auto one = worst_member_regret(Algorithm::max_variance, solo, 50, pool, params, sigma, 1, 4);
  const HardFunction& member = fc.functions[0];
  const Environment env = make_environment(
      [&member](const SpherePoint& x) { return member.evaluate(x); }, sigma,
      2.0 * fc.eps, 1, 123);
  const RegretTrace direct = run_episode(Algorithm::max_variance, env, 50, pool, params,
                                         derive_seed(55, 0));
  (void)direct;
  const RegretTrace seeded = run_episode(Algorithm::max_variance, env, 50, pool, params,
                                         derive_seed(4, 0));
  CHECK(one[0] == seeded.cumulative_regret);
}

TEST_CASE("accuracy schedule solves its fixed point") {
  const KernelParams kp{1, 1.0};
  const EigenSpectrum& spec = spectrum40();
  const double sigma = 0.5, B = 1.0, delta = 0.1;

  double prev = 1e300;
  for (int T : {500, 1000, 2000, 100000}) {
    const double eps = eps_schedule(T, sigma, B, delta, 1, spec, kp);
    CHECK(eps > 0.0);
    CHECK(eps < B / 2.0);
    CHECK(eps < prev);
    prev = eps;

    const double r = std::log(B / eps);
    const double g = 0.5 * std::sqrt(sigma * sigma / T * r / std::log(r) *
                                     std::log(1.0 / delta));
    CHECK(eps == doctest::Approx(g).epsilon(2e-6));
  }

  double lo = 1e300, hi = 0.0;
  for (int T : {1000, 10000, 100000, 1000000}) {
    const double eps = eps_schedule(T, sigma, B, delta, 1, spec, kp);
    const double r = std::log(B / eps);
    const double flat = eps * std::sqrt(static_cast<double>(T)) /
                        std::sqrt(r / std::log(r));
    lo = std::min(lo, flat);
    hi = std::max(hi, flat);
  }
  CHECK(hi <= 2.0 * lo);

  CHECK_THROWS_AS(eps_schedule(100, 10.0, 0.1, 0.01, 1, spec, kp), std::domain_error);
  CHECK_THROWS_AS(eps_schedule(0, sigma, B, delta, 1, spec, kp), std::invalid_argument);
  CHECK_THROWS_AS(eps_schedule(1000, sigma, B, delta, 2, spec, kp), std::invalid_argument);
  CHECK_THROWS_AS(eps_schedule(1000, sigma, B, 1.5, 1, spec, kp), std::invalid_argument);
}
