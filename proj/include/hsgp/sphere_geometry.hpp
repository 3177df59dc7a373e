#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

namespace hsgp {

// Point on S^d stored as a unit vector in R^{d+1}.
struct SpherePoint {
  std::vector<double> x;
  int dim() const { return static_cast<int>(x.size()) - 1; }
};

// Strict constructor: accepts coordinates whose norm is within 1e-12 of 1,
// renormalises them, and rejects anything else.
SpherePoint make_point(std::vector<double> coords);

// Scales arbitrary nonzero coordinates onto the sphere.
SpherePoint normalize(std::vector<double> coords);

double dot(const SpherePoint& a, const SpherePoint& b);
double geodesic(const SpherePoint& a, const SpherePoint& b);
SpherePoint antipode(const SpherePoint& p);

// Antipodal representative with positive last coordinate (ties on the equator
// resolve by the first nonzero coordinate's sign).
SpherePoint representative(const SpherePoint& p);

std::vector<SpherePoint> sample_uniform(int d, std::size_t count, std::uint64_t seed);

struct SeparatedSet {
  int d = 0;
  double w = 0.0;
  std::vector<SpherePoint> centers;
};

// Expected number of centers a greedy packing at separation w yields: the
// band area over the area of a w/2-cap.
std::size_t packing_estimate(int d, double w);

// Greedy packing of the band { x : x_{d+1} > 0, distance to equator > w/2 }
// at pairwise geodesic separation > w, maximal with respect to a uniformly
// sampled candidate pool. Throws std::invalid_argument when the budget is
// under 10 candidates per expected center.
SeparatedSet greedy_separated_set(int d, double w, std::size_t candidate_budget,
                                  std::uint64_t seed);

struct SpherePartition {
  SeparatedSet centers;
  // Hemisphere representative, then nearest center, lowest index on ties.
  int assign(const SpherePoint& p) const;
  int size() const { return static_cast<int>(centers.centers.size()); }
};

SpherePartition build_partition(const SeparatedSet& s);

// Infimum geodesic distance from every center to the two-lobe region of
// z_index, approximated over `samples` uniform draws (entry z_index is 0).
std::vector<double> region_inf_distances(const SpherePartition& p, int z_index,
                                         std::size_t samples, std::uint64_t seed);

// Histogram of the other centers by infimum distance to region z_index
// (bin i holds distances in (i w/2, (i+1) w/2]); entries sum to size()-1.
std::vector<std::int64_t> annulus_counts(const SpherePartition& p, int z_index,
                                         std::size_t samples, std::uint64_t seed);

void to_json(nlohmann::json& j, const SpherePoint& p);
void from_json(const nlohmann::json& j, SpherePoint& p);
void to_json(nlohmann::json& j, const SeparatedSet& s);
void from_json(const nlohmann::json& j, SeparatedSet& s);

}  // namespace hsgp
