#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "hsgp/sphere_geometry.hpp"

using namespace hsgp;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}
}  // namespace

TEST_CASE("point construction and geodesic basics") {
  const SpherePoint e1 = make_point({1.0, 0.0, 0.0});
  const SpherePoint e2 = make_point({0.0, 1.0, 0.0});
  CHECK(geodesic(e1, e2) == doctest::Approx(kPi / 2).epsilon(1e-14));
  CHECK(geodesic(e1, e1) == 0.0);
  CHECK(geodesic(e1, antipode(e1)) == doctest::Approx(kPi).epsilon(1e-14));
  CHECK_THROWS_AS(make_point({0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(dot(e1, make_point({1.0, 0.0})), std::invalid_argument);
  const SpherePoint q = normalize({3.0, 4.0});
  CHECK(q.x[0] == doctest::Approx(0.6));
  CHECK(q.x[1] == doctest::Approx(0.8));
}

TEST_CASE("uniform sampling is deterministic, unit norm, and balanced") {
  const auto a = sample_uniform(2, 10000, 7);
  const auto b = sample_uniform(2, 10000, 7);
  const auto c = sample_uniform(2, 10000, 8);
  REQUIRE(a.size() == 10000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
  }
  CHECK(a[0].x != c[0].x);
  double mean[3] = {0, 0, 0};
  for (const auto& p : a) {
    double n2 = 0;
    for (double v : p.x) n2 += v * v;
    CHECK(std::abs(std::sqrt(n2) - 1.0) <= 1e-12);
    for (int k = 0; k < 3; ++k) mean[k] += p.x[k];
  }
  for (int k = 0; k < 3; ++k) CHECK(std::abs(mean[k] / 10000) <= 4.0 / std::sqrt(10000.0));
}

TEST_CASE("greedy packing respects separation and the band") {
  for (int d : {1, 2}) {
    const double w = 0.25;
    const auto budget = static_cast<std::size_t>(100 * std::pow(kPi / w, d));
    const auto set = greedy_separated_set(d, w, budget, 42);
    REQUIRE(set.centers.size() >= 2);
    for (std::size_t i = 0; i < set.centers.size(); ++i) {
      CHECK(std::asin(set.centers[i].x.back()) >= 0.5 * w - 1e-12);
      for (std::size_t j = i + 1; j < set.centers.size(); ++j) {
        CHECK(geodesic(set.centers[i], set.centers[j]) > w);
      }
    }
    // near-maximality: fresh band points almost always sit within w of a center
    std::size_t covered = 0, total = 0;
    for (const auto& p : sample_uniform(d, 4000, 99)) {
      if (std::asin(std::abs(p.x.back())) <= 0.5 * w) continue;
      const SpherePoint r = representative(p);
      ++total;
      for (const auto& z : set.centers) {
        if (geodesic(r, z) <= w) {
          ++covered;
          break;
        }
      }
    }
    CHECK(covered >= (total * 95) / 100);
  }
}

TEST_CASE("quarter-circle band admits exactly one center") {
  const auto set = greedy_separated_set(1, kPi / 2, 200, 3);
  CHECK(set.centers.size() == 1);
}

TEST_CASE("circle packing count matches the arc-length oracle within factor 2") {
  const double w = 0.1;
  const auto set = greedy_separated_set(1, w, 100 * static_cast<std::size_t>(kPi / w), 5);
  const double oracle = std::floor((kPi - w) / w);
  CHECK(set.centers.size() >= oracle / 2);
  CHECK(set.centers.size() <= oracle * 2);
}

TEST_CASE("packing count scales like w^{-d}") {
  for (int d : {1, 2}) {
    std::vector<double> logs_w, logs_n;
    for (double w : {0.4, 0.2, 0.1, 0.05}) {
      const auto budget = static_cast<std::size_t>(100 * std::pow(kPi / w, d));
      const auto set = greedy_separated_set(d, w, budget, 11);
      logs_w.push_back(std::log(1.0 / w));
      logs_n.push_back(std::log(static_cast<double>(set.centers.size())));
    }
    const double slope = lsq_slope(logs_w, logs_n);
    CHECK(slope >= 0.8 * d);
    CHECK(slope <= 1.2 * d);
  }
}

TEST_CASE("budget guard rejects starved pools") {
  CHECK_THROWS_AS(greedy_separated_set(2, 0.05, 100, 1), std::invalid_argument);
}

TEST_CASE("partition assignment: representative rule, ties, and lobes") {
  SeparatedSet s;
  s.d = 1;
  s.w = 0.3;
  const double c = std::cos(kPi / 3), h = std::sin(kPi / 3);
  s.centers = {make_point({c, h}), make_point({-c, h})};
  const auto part = build_partition(s);

  CHECK(part.assign(s.centers[0]) == 0);
  CHECK(part.assign(s.centers[1]) == 1);
  // antipodal lobe maps back to the same region
  CHECK(part.assign(antipode(s.centers[0])) == 0);
  CHECK(part.assign(antipode(s.centers[1])) == 1);
  // exact tie at the north pole resolves to the lowest index
  CHECK(part.assign(make_point({0.0, 1.0})) == 0);
  // equator points fold onto their positive representative
  CHECK(part.assign(make_point({-1.0, 0.0})) == part.assign(make_point({1.0, 0.0})));
  CHECK_THROWS_AS(build_partition(SeparatedSet{}), std::invalid_argument);
}

TEST_CASE("annulus histogram: totals, determinism, and flat profile on the circle") {
  const double w = 0.1;
  const auto set = greedy_separated_set(1, w, 100 * static_cast<std::size_t>(kPi / w), 21);
  const auto part = build_partition(set);
  const int m = part.size();
  const int z = m / 2;
  const auto counts = annulus_counts(part, z, 100000, 17);
  const auto counts2 = annulus_counts(part, z, 100000, 17);
  CHECK(counts == counts2);
  std::int64_t total = 0;
  for (std::int64_t v : counts) {
    total += v;
    CHECK(v <= 8);  // d=1: constant-bounded occupancy per annulus
  }
  CHECK(total == m - 1);
}

TEST_CASE("annulus occupancy grows at most linearly on S^2") {
  const double w = 0.2;
  const auto set = greedy_separated_set(2, w, static_cast<std::size_t>(100 * std::pow(kPi / w, 2)), 23);
  const auto part = build_partition(set);
  const auto counts = annulus_counts(part, 0, 200000, 29);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    total += counts[i];
    CHECK(counts[i] <= 64 * std::max<std::int64_t>(1, static_cast<std::int64_t>(i)));
  }
  CHECK(total == part.size() - 1);
}

TEST_CASE("separated set survives a JSON round trip exactly") {
  const auto set = greedy_separated_set(2, 0.4, static_cast<std::size_t>(100 * std::pow(kPi / 0.4, 2)), 31);
  const nlohmann::json j = set;
  const auto back = j.get<SeparatedSet>();
  CHECK(back.d == set.d);
  CHECK(back.w == set.w);
  REQUIRE(back.centers.size() == set.centers.size());
  for (std::size_t i = 0; i < set.centers.size(); ++i) CHECK(back.centers[i].x == set.centers[i].x);
}
