#include "hsgp/hard_instances.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <random>
#include <stdexcept>

#include "hsgp/errors.hpp"
#include "hsgp/parallel.hpp"
#include "hsgp/rng.hpp"
#include "hsgp/special_functions.hpp"

namespace hsgp {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp_unit(double t) { return std::min(1.0, std::max(-1.0, t)); }

}  // namespace

double b_value_cos(int N, int d, double t) {
  if (N < 1) throw std::invalid_argument("b_value_cos: N must be >= 1");
  if (d < 1) throw std::invalid_argument("b_value_cos: d must be >= 1");
  const double eta = 0.5 * (d + 1);
  return (gegenbauer(N, eta, t) + gegenbauer(N - 1, eta, t)) / sphere_area(d);
}

double b_value(const SpherePoint& x, const SpherePoint& z, int N, int d) {
  if (x.dim() != d || z.dim() != d)
    throw std::invalid_argument("b_value: points must live on S^d");
  return b_value_cos(N, d, clamp_unit(dot(x, z)));
}

double b_value_series(int N, int d, double t) {
  if (N < 1) throw std::invalid_argument("b_value_series: N must be >= 1");
  if (d < 1) throw std::invalid_argument("b_value_series: d must be >= 1");
  double s = 0.0;
  for (int n = 0; n <= N; ++n)
    s += static_cast<double>(harmonic_dim(n, d + 1)) * legendre_sphere(n, d + 1, t);
  return s / sphere_area(d);
}

double b_peak(int N, int d) {
  if (N < 1) throw std::invalid_argument("b_peak: N must be >= 1");
  return static_cast<double>(harmonic_dim_cumulative(N, d + 1)) / sphere_area(d);
}

double HardFunction::evaluate(const SpherePoint& x) const {
  return evaluate_cos(clamp_unit(dot(x, z)));
}

double HardFunction::evaluate_cos(double t) const {
  return 2.0 * eps * (b_value_cos(N, kp.d, t) / b_value_cos(N, kp.d, 1.0));
}

double measure_width(const HardFunction& f, int grid) {
  if (grid < 1000) throw std::invalid_argument("measure_width: grid must be >= 1000");
  const double step = kPi / grid;
  double worst = 0.0;  // angle 0 is always bad: f(z) = 2 eps > eps
  for (int k = 1; k <= grid; ++k) {
    const double rho = k * step;
    if (std::abs(f.evaluate_cos(std::cos(rho))) > f.eps)
      worst = std::max(worst, std::min(rho, kPi - rho));
  }
  return worst + step;
}

FunctionClass build_class(double eps, double B, const KernelParams& kp,
                          const EigenSpectrum& spectrum, std::uint64_t seed) {
  if (!(eps > 0.0) || !(B > 0.0)) throw std::invalid_argument("build_class: eps and B must be positive");
  if (eps >= B) throw std::invalid_argument("build_class: eps must be well below the budget");
  const int N_bar = select_N_bar(eps, B / 3.0, spectrum);
  if (N_bar < 2) throw std::invalid_argument("build_class: budget admits only N_bar < 2");

  std::vector<double> pole(kp.d + 1, 0.0);
  pole.back() = 1.0;
  const HardFunction reference{SpherePoint{pole}, eps, N_bar, kp};
  const int grid = std::max(1000, 50 * N_bar);
  const double rho_star = measure_width(reference, grid);
  const double w = 2.0 * rho_star;

  const std::size_t budget = 40 * packing_estimate(kp.d, w) + 2000;
  SeparatedSet centers = greedy_separated_set(kp.d, w, budget, seed);

  FunctionClass fc;
  fc.eps = eps;
  fc.N_bar = N_bar;
  fc.width = w;
  fc.budget = B;
  fc.partition = build_partition(centers);
  fc.functions.reserve(centers.centers.size());
  for (const SpherePoint& z : fc.partition.centers.centers)
    fc.functions.push_back(HardFunction{z, eps, N_bar, kp});
  return fc;
}

namespace {

// `samples` rejection-sampled points of the two-lobe region, plus the center
// and its antipode.
std::vector<SpherePoint> region_points(const FunctionClass& fc, int z_index,
                                       std::size_t samples, std::uint64_t seed) {
  const int m = fc.size();
  if (z_index < 0 || z_index >= m) throw std::out_of_range("region_points: bad z_index");
  const SpherePoint& c = fc.partition.centers.centers[z_index];

  std::vector<SpherePoint> pts;
  pts.reserve(samples + 2);
  pts.push_back(c);
  pts.push_back(antipode(c));

  auto rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> v(fc.partition.centers.d + 1);
  std::size_t kept = 0;
  std::size_t attempts = 0;
  const std::size_t max_attempts = 400 * samples * static_cast<std::size_t>(m) + 100000;
  while (kept < samples && attempts < max_attempts) {
    ++attempts;
    double s = 0.0;
    for (double& x : v) {
      x = gauss(rng);
      s += x * x;
    }
    if (s < 1e-280) continue;
    const double inv = 1.0 / std::sqrt(s);
    std::vector<double> u(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) u[i] = v[i] * inv;
    SpherePoint p{std::move(u)};
    if (fc.partition.assign(p) == z_index) {
      pts.push_back(std::move(p));
      ++kept;
    }
  }
  if (kept < samples) throw NumericalError("region_points: rejection sampling starved");
  return pts;
}

template <bool Parallel>
std::vector<double> sup_squares_impl(const FunctionClass& fc, int z_index,
                                     std::size_t samples, std::uint64_t seed) {
  const auto pts = region_points(fc, z_index, samples, seed);
  const int m = fc.size();
  std::vector<double> sup(m, 0.0);
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (Parallel)
  for (int j = 0; j < m; ++j) {
    double best = 0.0;
    for (const SpherePoint& p : pts) {
      const double v = fc.functions[j].evaluate(p);
      best = std::max(best, v * v);
    }
    sup[j] = best;
  }
  return sup;
}

}  // namespace

std::vector<double> region_sup_squares(const FunctionClass& fc, int z_index,
                                       std::size_t samples, std::uint64_t seed) {
  return sup_squares_impl<true>(fc, z_index, samples, seed);
}

std::vector<double> region_sup_squares_serial(const FunctionClass& fc, int z_index,
                                              std::size_t samples, std::uint64_t seed) {
  return sup_squares_impl<false>(fc, z_index, samples, seed);
}

double sup_sum_ratio(const FunctionClass& fc, int z_index, std::size_t samples,
                     std::uint64_t seed) {
  const auto sup = region_sup_squares(fc, z_index, samples, seed);
  const double total = std::accumulate(sup.begin(), sup.end(), 0.0);
  return total / (fc.eps * fc.eps);
}

std::pair<SphereFunction, SphereFunction> adversarial_pair(const FunctionClass& fc,
                                                           int i, int j) {
  const int m = fc.size();
  if (i < 0 || i >= m || j < 0 || j >= m) throw std::out_of_range("adversarial_pair: bad index");
  if (i == j) throw std::invalid_argument("adversarial_pair: members must differ");
  const HardFunction fi = fc.functions[i];
  const HardFunction fj = fc.functions[j];
  SphereFunction f = [fi](const SpherePoint& x) { return fi.evaluate(x); };
  SphereFunction f_tilde = [fi, fj](const SpherePoint& x) {
    return fi.evaluate(x) + 2.0 * fj.evaluate(x);
  };
  return {std::move(f), std::move(f_tilde)};
}

double adversarial_pair_norm(const FunctionClass& fc, int i, int j,
                             const EigenSpectrum& spectrum) {
  const int m = fc.size();
  if (i < 0 || i >= m || j < 0 || j >= m)
    throw std::out_of_range("adversarial_pair_norm: bad index");
  if (i == j) throw std::invalid_argument("adversarial_pair_norm: members must differ");
  const HardFunction& f = fc.functions[i];
  const int N = f.N;
  const int d = f.kp.d;
  if (spectrum.max_degree() < N)
    throw std::invalid_argument("adversarial_pair_norm: spectrum shorter than degree");

  const double t_ij = clamp_unit(dot(f.z, fc.functions[j].z));
  const double log_scale_sq =
      2.0 * (std::log(2.0 * f.eps) - std::log(b_peak(N, d))) - std::log(sphere_area(d));
  double inner = 0.0;
  for (int n = 0; n <= N; ++n) {
    const double lg = log_scale_sq + std::log(static_cast<double>(spectrum.mult[n])) -
                      spectrum.log_lambda[n];
    inner += std::exp(lg) * legendre_sphere(n, d + 1, t_ij);
  }
  const double norm = rkhs_norm_hard(f.eps, N, spectrum);
  const double sq = 5.0 * norm * norm + 4.0 * inner;
  return std::sqrt(std::max(0.0, sq));
}

GaussianBaselineParams make_gaussian_params(double sigma_measure, double theta) {
  if (!(sigma_measure > 0.0) || !(theta > 0.0))
    throw std::invalid_argument("make_gaussian_params: sigma and theta must be positive");
  GaussianBaselineParams gp;
  gp.sigma_measure = sigma_measure;
  gp.theta = theta;
  gp.a = 1.0 / (4.0 * sigma_measure * sigma_measure);
  gp.b = 1.0 / theta;
  gp.c = std::sqrt(gp.a * gp.a + 2.0 * gp.a * gp.b);
  gp.A = gp.a + gp.b + gp.c;
  gp.Bg = gp.b / gp.A;
  return gp;
}

double gaussian_lambda(int n, const GaussianBaselineParams& gp) {
  if (n < 0) throw std::invalid_argument("gaussian_lambda: n must be >= 0");
  return std::sqrt(2.0 * gp.a / gp.A) * std::pow(gp.Bg, n);
}

double gaussian_baseline(double x, int N, const GaussianBaselineParams& gp, int d) {
  if (d != 1) throw std::domain_error("gaussian_baseline: only the real line (d = 1) exists");
  if (N < 0) throw std::invalid_argument("gaussian_baseline: N must be >= 0");
  const double u = std::sqrt(2.0 * gp.c) * x;
  const double pref = std::sqrt(gp.c / gp.a) * std::exp(-(gp.c - gp.a) * x * x) /
                      (std::exp2(N + 1) * std::tgamma(N + 1.0));
  double quotient;
  if (u == 0.0) {
    // [H_N(0)H_{N+1}(u) - H_N(u)H_{N+1}(0)] / u by the derivative at 0,
    // H'_{n}(0) = 2n H_{n-1}(0).
    const double h_nm1 = N >= 1 ? hermite(N - 1, 0.0) : 0.0;
    quotient = 2.0 * (N + 1) * hermite(N, 0.0) * hermite(N, 0.0) -
               2.0 * N * h_nm1 * hermite(N + 1, 0.0);
  } else {
    quotient = (hermite(N, 0.0) * hermite(N + 1, u) - hermite(N, u) * hermite(N + 1, 0.0)) / u;
  }
  return pref * quotient;
}

double gaussian_baseline_series(double x, int N, const GaussianBaselineParams& gp) {
  if (N < 0) throw std::invalid_argument("gaussian_baseline_series: N must be >= 0");
  const double u = std::sqrt(2.0 * gp.c) * x;
  const double envelope = std::exp(-(gp.c - gp.a) * x * x);
  double weight = std::sqrt(gp.c / gp.a);  // c_n^2 = sqrt(c/a) / (2^n n!)
  double s = 0.0;
  for (int n = 0; n <= N; ++n) {
    s += weight * hermite(n, u) * hermite(n, 0.0);
    weight /= 2.0 * (n + 1);
  }
  return envelope * s;
}

void to_json(nlohmann::json& j, const FunctionClass& fc) {
  KernelParams kp = fc.functions.empty() ? KernelParams{fc.partition.centers.d, 0.0}
                                         : fc.functions.front().kp;
  j = nlohmann::json{{"eps", fc.eps},       {"N_bar", fc.N_bar},
                     {"width", fc.width},   {"budget", fc.budget},
                     {"kernel", kp},        {"centers", fc.partition.centers}};
}

void from_json(const nlohmann::json& j, FunctionClass& fc) {
  fc = FunctionClass{};
  j.at("eps").get_to(fc.eps);
  j.at("N_bar").get_to(fc.N_bar);
  j.at("width").get_to(fc.width);
  j.at("budget").get_to(fc.budget);
  KernelParams kp = j.at("kernel").get<KernelParams>();
  SeparatedSet centers = j.at("centers").get<SeparatedSet>();
  fc.partition = build_partition(centers);
  fc.functions.reserve(centers.centers.size());
  for (const SpherePoint& z : fc.partition.centers.centers)
    fc.functions.push_back(HardFunction{z, fc.eps, fc.N_bar, kp});
}

}  // namespace hsgp
