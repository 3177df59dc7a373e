#include "hsgp/sphere_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hsgp/rng.hpp"

namespace hsgp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

double norm_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

}  // namespace

SpherePoint make_point(std::vector<double> coords) {
  if (coords.size() < 2) throw std::invalid_argument("make_point: need at least 2 coordinates");
  const double n = norm_of(coords);
  if (std::abs(n - 1.0) > 1e-12) throw std::invalid_argument("make_point: norm not within 1e-12 of 1");
  for (double& c : coords) c /= n;
  return SpherePoint{std::move(coords)};
}

SpherePoint normalize(std::vector<double> coords) {
  if (coords.size() < 2) throw std::invalid_argument("normalize: need at least 2 coordinates");
  const double n = norm_of(coords);
  if (n < 1e-300) throw std::invalid_argument("normalize: zero vector");
  for (double& c : coords) c /= n;
  return SpherePoint{std::move(coords)};
}

double dot(const SpherePoint& a, const SpherePoint& b) {
  if (a.x.size() != b.x.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.x.size(); ++i) s += a.x[i] * b.x[i];
  return s;
}

double geodesic(const SpherePoint& a, const SpherePoint& b) {
  return std::acos(std::clamp(dot(a, b), -1.0, 1.0));
}

SpherePoint antipode(const SpherePoint& p) {
  SpherePoint q = p;
  for (double& c : q.x) c = -c;
  return q;
}

SpherePoint representative(const SpherePoint& p) {
  const double last = p.x.back();
  if (last > 0.0) return p;
  if (last < 0.0) return antipode(p);
  for (double c : p.x) {
    if (c > 0.0) return p;
    if (c < 0.0) return antipode(p);
  }
  return p;
}

std::vector<SpherePoint> sample_uniform(int d, std::size_t count, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("sample_uniform: d must be >= 1");
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<SpherePoint> out;
  out.reserve(count);
  std::vector<double> v(d + 1);
  while (out.size() < count) {
    double s = 0.0;
    for (double& c : v) {
      c = gauss(rng);
      s += c * c;
    }
    if (s < 1e-280) continue;
    const double inv = 1.0 / std::sqrt(s);
    std::vector<double> u(d + 1);
    for (int i = 0; i <= d; ++i) u[i] = v[i] * inv;
    out.push_back(SpherePoint{std::move(u)});
  }
  return out;
}

std::size_t packing_estimate(int d, double w) {
  if (d < 1) throw std::invalid_argument("packing_estimate: d must be >= 1");
  if (!(w > 0.0) || !(w < kPi)) throw std::invalid_argument("packing_estimate: need 0 < w < pi");
  auto cap_integral = [d](double r) {
    const int n = 2000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double a = r * i / n, b = r * (i + 1) / n;
      s += 0.5 * (std::pow(std::sin(a), d - 1) + std::pow(std::sin(b), d - 1)) * (b - a);
    }
    return s;
  };
  const double band = cap_integral(0.5 * kPi - 0.5 * w);
  const double cap = cap_integral(0.5 * w);
  if (cap <= 0.0) return 1;
  return static_cast<std::size_t>(std::max(1.0, std::floor(band / cap)));
}

SeparatedSet greedy_separated_set(int d, double w, std::size_t candidate_budget,
                                  std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("greedy_separated_set: d must be >= 1");
  if (!(w > 0.0) || !(w < kPi)) throw std::invalid_argument("greedy_separated_set: need 0 < w < pi");
  const std::size_t expect = packing_estimate(d, w);
  if (candidate_budget < 10 * expect)
    throw std::invalid_argument("greedy_separated_set: candidate budget under 10 per expected center");

  const double min_height = std::sin(0.5 * w);
  const double cos_w = std::cos(w);
  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SeparatedSet set;
  set.d = d;
  set.w = w;
  std::vector<double> v(d + 1);
  std::size_t drawn = 0;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 200 * candidate_budget + 1000;
  while (drawn < candidate_budget && attempts < max_attempts) {
    ++attempts;
    double s = 0.0;
    for (double& c : v) {
      c = gauss(rng);
      s += c * c;
    }
    if (s < 1e-280) continue;
    const double inv = 1.0 / std::sqrt(s);
    if (v.back() * inv <= min_height) continue;  // outside the band
    ++drawn;
    std::vector<double> u(d + 1);
    for (int i = 0; i <= d; ++i) u[i] = v[i] * inv;
    const SpherePoint cand{std::move(u)};
    bool ok = true;
    for (const SpherePoint& z : set.centers) {
      if (dot(cand, z) >= cos_w) {  // geodesic distance <= w
        ok = false;
        break;
      }
    }
    if (ok) set.centers.push_back(cand);
  }
  if (drawn < candidate_budget)
    throw std::invalid_argument("greedy_separated_set: band too thin for rejection sampling");
  return set;
}

int SpherePartition::assign(const SpherePoint& p) const {
  if (centers.centers.empty()) throw std::invalid_argument("assign: empty partition");
  const SpherePoint r = representative(p);
  int best = 0;
  double best_dot = -2.0;
  for (std::size_t i = 0; i < centers.centers.size(); ++i) {
    const double g = dot(r, centers.centers[i]);
    if (g > best_dot) {
      best_dot = g;
      best = static_cast<int>(i);
    }
  }
  return best;
}

SpherePartition build_partition(const SeparatedSet& s) {
  if (s.centers.empty()) throw std::invalid_argument("build_partition: no centers");
  return SpherePartition{s};
}

std::vector<double> region_inf_distances(const SpherePartition& p, int z_index,
                                         std::size_t samples, std::uint64_t seed) {
  const int m = p.size();
  if (z_index < 0 || z_index >= m) throw std::invalid_argument("region_inf_distances: bad z_index");
  // Distances fold through the antipode because the region has two lobes.
  std::vector<double> inf_d(m, std::numeric_limits<double>::infinity());
  auto fold = [&](const SpherePoint& x) {
    for (int j = 0; j < m; ++j) {
      const double rho = geodesic(x, p.centers.centers[j]);
      inf_d[j] = std::min(inf_d[j], std::min(rho, kPi - rho));
    }
  };
  fold(p.centers.centers[z_index]);
  for (const SpherePoint& x : sample_uniform(p.centers.d, samples, seed)) {
    if (p.assign(x) == z_index) fold(representative(x));
  }
  inf_d[z_index] = 0.0;
  return inf_d;
}

std::vector<std::int64_t> annulus_counts(const SpherePartition& p, int z_index,
                                         std::size_t samples, std::uint64_t seed) {
  const int m = p.size();
  if (z_index < 0 || z_index >= m) throw std::invalid_argument("annulus_counts: bad z_index");
  const double half_w = 0.5 * p.centers.w;
  const auto inf_d = region_inf_distances(p, z_index, samples, seed);

  std::vector<std::int64_t> counts;
  for (int j = 0; j < m; ++j) {
    if (j == z_index) continue;
    int bin = static_cast<int>(std::ceil(inf_d[j] / half_w)) - 1;
    if (bin < 0) bin = 0;
    if (static_cast<std::size_t>(bin) >= counts.size()) counts.resize(bin + 1, 0);
    ++counts[bin];
  }
  return counts;
}

void to_json(nlohmann::json& j, const SpherePoint& p) { j = nlohmann::json{{"x", p.x}}; }

void from_json(const nlohmann::json& j, SpherePoint& p) {
  p.x = j.at("x").get<std::vector<double>>();
}

void to_json(nlohmann::json& j, const SeparatedSet& s) {
  j = nlohmann::json{{"d", s.d}, {"w", s.w}, {"centers", s.centers}};
}

void from_json(const nlohmann::json& j, SeparatedSet& s) {
  j.at("d").get_to(s.d);
  j.at("w").get_to(s.w);
  j.at("centers").get_to(s.centers);
}

}  // namespace hsgp
