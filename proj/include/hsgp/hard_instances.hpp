#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hsgp/mercer.hpp"
#include "hsgp/sphere_geometry.hpp"

namespace hsgp {

// Truncated reproducing sum of degree N, as a zonal profile in t = cos(angle):
//   b_N(t) = (C_N^{((d+1)/2)}(t) + C_{N-1}^{((d+1)/2)}(t)) / |S^d|.
// Requires N >= 1. For d = 1 this is the Dirichlet kernel over 2 pi.
double b_value_cos(int N, int d, double t);
double b_value(const SpherePoint& x, const SpherePoint& z, int N, int d);

// Reference route: sum_{n<=N} (N_{n,d+1} / |S^d|) P_{n,d+1}(t).
double b_value_series(int N, int d, double t);

// b_N(1) = N_{N,d+2} / |S^d| by the cumulative-dimension identity.
double b_peak(int N, int d);

// Approximated delta function of height 2 eps centered at z,
//   f(x) = (2 eps / b_N(1)) b_N(x . z).
struct HardFunction {
  SpherePoint z;
  double eps = 0.0;
  int N = 1;
  KernelParams kp;

  double evaluate(const SpherePoint& x) const;
  // Profile as a function of t = cos(angle to z); evaluate_cos(1) == 2 eps
  // exactly because numerator and denominator run the same recurrence.
  double evaluate_cos(double t) const;
  double peak() const { return 2.0 * eps; }
};

// Smallest grid angle rho* such that |f| <= eps at every grid angle in
// [rho*, pi - rho*]. Grid must be >= 1000; the scan step is pi / grid.
double measure_width(const HardFunction& f, int grid);

// Hard functions sharing one degree, placed on a w-separated center set with
// w = 2 rho*. Members are built with budget B/3 so that sums f + 2 f~ of two
// members stay within B.
struct FunctionClass {
  std::vector<HardFunction> functions;
  SpherePartition partition;
  double eps = 0.0;
  int N_bar = 1;
  double width = 0.0;
  double budget = 0.0;
  int size() const { return static_cast<int>(functions.size()); }
};

// Throws std::invalid_argument when eps >= B, when select_N_bar(eps, B/3)
// fails, or when it returns N_bar < 2.
FunctionClass build_class(double eps, double B, const KernelParams& kp,
                          const EigenSpectrum& spectrum, std::uint64_t seed);

// Sampled sup of f_j^2 over the two-lobe region of z_index, for every member
// j (including j == z_index). `samples` points are rejection-sampled from the
// region; the region's center and its antipode are always included.
std::vector<double> region_sup_squares(const FunctionClass& fc, int z_index,
                                       std::size_t samples, std::uint64_t seed);
std::vector<double> region_sup_squares_serial(const FunctionClass& fc, int z_index,
                                              std::size_t samples, std::uint64_t seed);

// sum_j (sup over region z_index of f_j^2) / eps^2. The self term contributes
// about 4; the property under test is that the total stays bounded by a
// constant independent of eps.
double sup_sum_ratio(const FunctionClass& fc, int z_index, std::size_t samples,
                     std::uint64_t seed);

using SphereFunction = std::function<double(const SpherePoint&)>;

// Change-of-measure pair (f, f + 2 f~) built from members i and j. Throws
// std::out_of_range on bad indices and std::invalid_argument when i == j.
std::pair<SphereFunction, SphereFunction> adversarial_pair(const FunctionClass& fc,
                                                           int i, int j);

// RKHS norm of f_i + 2 f_j via the addition theorem:
//   ||f_i + 2 f_j||^2 = 5 ||f||^2 + 4 <f_i, f_j>,
//   <f_i, f_j> = (2 eps / b_peak)^2 sum_{n<=N} mult_n P_{n,d+1}(z_i . z_j)
//                / (|S^d| lambda_n).
double adversarial_pair_norm(const FunctionClass& fc, int i, int j,
                             const EigenSpectrum& spectrum);

// SE kernel exp(-(x-y)^2 / theta) on the real line under the Gaussian measure
// N(0, sigma^2): a = 1/(4 sigma^2), b = 1/theta, c = sqrt(a^2 + 2ab),
// A = a + b + c, Bg = b / A.
struct GaussianBaselineParams {
  double sigma_measure = 1.0;
  double theta = 1.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double A = 0.0;
  double Bg = 0.0;
};

GaussianBaselineParams make_gaussian_params(double sigma_measure, double theta);

// lambda_n = sqrt(2a/A) Bg^n.
double gaussian_lambda(int n, const GaussianBaselineParams& gp);

// b_N(x) = sum_{n<=N} phi_n(x) phi_n(0) with phi_n the normalized Hermite
// eigenfunctions, collapsed by the Christoffel-Darboux formula to
//   sqrt(c/a) e^{-(c-a)x^2} [H_N(0)H_{N+1}(u) - H_N(u)H_{N+1}(0)]
//     / (2^{N+1} N! u),   u = sqrt(2c) x,
// with the continuity limit at u = 0. Only d = 1 exists; other d throw
// std::domain_error.
double gaussian_baseline(double x, int N, const GaussianBaselineParams& gp, int d = 1);

// Direct eigenfunction sum, kept as the reference route.
double gaussian_baseline_series(double x, int N, const GaussianBaselineParams& gp);

void to_json(nlohmann::json& j, const FunctionClass& fc);
void from_json(const nlohmann::json& j, FunctionClass& fc);

}  // namespace hsgp
