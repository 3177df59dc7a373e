#include "hsgp/mercer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <locale>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include "hsgp/errors.hpp"
#include "hsgp/special_functions.hpp"

namespace hsgp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// 120 decimal digits: the spectrum reaches ~1e-100 by degree 60, far below
// what double-precision quadrature can resolve against an O(1) integrand.
using hp = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<120>>;

hp hp_pi() { return boost::math::constants::pi<hp>(); }

void validate(const KernelParams& kp) {
  if (kp.d < 1) throw std::invalid_argument("KernelParams: d must be >= 1");
  if (!(kp.theta > 0.0)) throw std::invalid_argument("KernelParams: theta must be positive");
}

// kappa(t) = exp(-2(1-t)/theta) restricted to t = cos(angle).
hp kappa_hp(const hp& t, double theta) { return exp(-2 * (1 - t) / hp(theta)); }

// All eigenvalues of degree 0..n_max for d = 1:
//   lambda_n = integral_0^{2pi} kappa(cos u) cos(nu) du,
// by the uniform periodic rule with doubling until every degree settles.
std::vector<hp> circle_eigen(double theta, int n_max, int start_nodes, double rel_tol) {
  const hp two_pi = 2 * hp_pi();
  int m = std::max(64, start_nodes);
  std::vector<hp> prev;
  for (; m <= (1 << 17); m *= 2) {
    std::vector<hp> sums(n_max + 1, hp(0));
    for (int j = 0; j < m; ++j) {
      const hp u = two_pi * j / m;
      const hp cu = cos(u);
      const hp f = kappa_hp(cu, theta);
      // cos(nu) by the Chebyshev recurrence in cos(u)
      hp c0 = 1, c1 = cu;
      sums[0] += f;
      if (n_max >= 1) sums[1] += f * c1;
      for (int n = 2; n <= n_max; ++n) {
        const hp cn = 2 * cu * c1 - c0;
        c0 = c1;
        c1 = cn;
        sums[n] += f * c1;
      }
    }
    for (auto& s : sums) s *= two_pi / m;
    if (!prev.empty()) {
      bool ok = true;
      for (int n = 0; n <= n_max; ++n) {
        if (abs(sums[n] - prev[n]) > rel_tol * abs(sums[n])) {
          ok = false;
          break;
        }
      }
      if (ok) return sums;
    }
    prev = std::move(sums);
  }
  throw NumericalError("eigen_quadrature: circle rule did not converge");
}

// tanh-sinh nodes for integral_{-1}^{1} f(t) dt at step h: t_k = tanh(g_k),
// g_k = (pi/2) sinh(kh). Weight (1 - t^2)^((d-2)/2) equals sech(g_k)^(d-2).
struct TsNode {
  hp t;
  hp weight;   // quadrature weight including h
  hp sech;     // sech(g_k), i.e. sqrt(1 - t^2)
};

std::vector<TsNode> ts_nodes(int level) {
  const hp h = hp(1) / (1 << level);
  const hp half_pi = hp_pi() / 2;
  std::vector<TsNode> nodes;
  const int K = static_cast<int>(std::ceil(6.0 * (1 << level)));
  for (int k = -K; k <= K; ++k) {
    const hp g = half_pi * sinh(h * k);
    const hp ch = cosh(g);
    const hp w = h * half_pi * cosh(h * k) / (ch * ch);
    if (w < hp(1e-150)) continue;
    nodes.push_back(TsNode{tanh(g), w, 1 / ch});
  }
  return nodes;
}

// All eigenvalues of degree 0..n_max for d >= 2:
//   lambda_n = |S^{d-1}| integral_{-1}^{1} kappa(t) P_{n,d+1}(t) (1-t^2)^((d-2)/2) dt.
std::vector<hp> projection_eigen(const KernelParams& kp, int n_max, int start_nodes,
                                 double rel_tol) {
  const int d = kp.d;
  int level = 3;
  while ((1 << level) * 12 < start_nodes && level < 9) ++level;
  std::vector<hp> prev;
  for (; level <= 10; ++level) {
    std::vector<hp> sums(n_max + 1, hp(0));
    for (const TsNode& nd : ts_nodes(level)) {
      hp f = kappa_hp(nd.t, kp.theta) * nd.weight;
      if (d > 2) f *= pow(nd.sech, d - 2);
      // P_{n,d+1}(t) recurrence: (n+d-1) P_{n+1} = (2n+d-1) t P_n - n P_{n-1}
      hp pm = 1, p = nd.t;
      sums[0] += f;
      if (n_max >= 1) sums[1] += f * p;
      for (int n = 2; n <= n_max; ++n) {
        const hp pn = ((2 * (n - 1) + d - 1) * nd.t * p - (n - 1) * pm) / (n - 2 + d);
        pm = p;
        p = pn;
        sums[n] += f * p;
      }
    }
    const double area_dm1 = sphere_area(d - 1);
    for (auto& s : sums) s *= hp(area_dm1);
    if (!prev.empty()) {
      bool ok = true;
      for (int n = 0; n <= n_max; ++n) {
        if (abs(sums[n] - prev[n]) > rel_tol * abs(sums[n])) {
          ok = false;
          break;
        }
      }
      if (ok) return sums;
    }
    prev = std::move(sums);
  }
  throw NumericalError("eigen_quadrature: projection rule did not converge");
}

std::vector<hp> eigen_all_hp(const KernelParams& kp, int n_max, int start_nodes,
                             double rel_tol) {
  validate(kp);
  if (n_max < 0) throw std::invalid_argument("eigen quadrature: n_max must be >= 0");
  return kp.d == 1 ? circle_eigen(kp.theta, n_max, start_nodes, rel_tol)
                   : projection_eigen(kp, n_max, start_nodes, rel_tol);
}

struct SpectrumKey {
  int d;
  double theta;
  int n_max;
  bool operator<(const SpectrumKey& o) const {
    return std::tie(d, theta, n_max) < std::tie(o.d, o.theta, o.n_max);
  }
};

}  // namespace

double eigen_lower_bound_log(int n, const KernelParams& kp, double C) {
  validate(kp);
  if (n < 0) throw std::invalid_argument("eigen_lower_bound: n must be >= 0");
  if (!(C > 0.0)) throw std::invalid_argument("eigen_lower_bound: C must be positive");
  const double base = 2.0 * n + kp.d - 1.0;
  const double decay = base > 0.0 ? (n + 0.5 * kp.d) * std::log(base) : 0.0;
  return n * std::log(2.0 * std::exp(1.0) / kp.theta) - decay + std::log(C);
}

double eigen_lower_bound(int n, const KernelParams& kp, double C) {
  return std::exp(eigen_lower_bound_log(n, kp, C));
}

double eigen_quadrature(int n, const KernelParams& kp, int nodes) {
  return static_cast<double>(eigen_all_hp(kp, n, nodes, 1e-10)[n]);
}

double eigen_quadrature_log(int n, const KernelParams& kp, int nodes) {
  return static_cast<double>(log(eigen_all_hp(kp, n, nodes, 1e-10)[n]));
}

EigenSpectrum build_spectrum(const KernelParams& kp, int n_max) {
  static std::map<SpectrumKey, EigenSpectrum> cache;
  static std::mutex mutex;
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(SpectrumKey{kp.d, kp.theta, n_max});
    if (it != cache.end()) return it->second;
  }
  const auto vals = eigen_all_hp(kp, n_max, 128, 1e-12);
  EigenSpectrum s;
  s.kp = kp;
  s.source = SpectrumSource::quadrature;
  for (int n = 0; n <= n_max; ++n) {
    if (vals[n] <= 0) throw NumericalError("build_spectrum: nonpositive eigenvalue");
    s.lambda.push_back(static_cast<double>(vals[n]));
    s.log_lambda.push_back(static_cast<double>(log(vals[n])));
    s.mult.push_back(harmonic_dim(n, kp.d + 1));
  }
  std::lock_guard<std::mutex> lock(mutex);
  cache.emplace(SpectrumKey{kp.d, kp.theta, n_max}, s);
  return s;
}

EigenSpectrum build_lower_bound_spectrum(const KernelParams& kp, int n_max, double C) {
  EigenSpectrum s;
  s.kp = kp;
  s.source = SpectrumSource::lower_bound;
  for (int n = 0; n <= n_max; ++n) {
    const double lg = eigen_lower_bound_log(n, kp, C);
    s.log_lambda.push_back(lg);
    s.lambda.push_back(std::exp(lg));
    s.mult.push_back(harmonic_dim(n, kp.d + 1));
  }
  return s;
}

double fit_lower_constant(const EigenSpectrum& spec) {
  double lo = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= spec.max_degree(); ++n) {
    lo = std::min(lo, spec.log_lambda[n] - eigen_lower_bound_log(n, spec.kp, 1.0));
  }
  return std::exp(lo);
}

double fit_upper_constant(const EigenSpectrum& spec) {
  const double log_area = std::log(sphere_area(spec.kp.d));
  double hi = -std::numeric_limits<double>::infinity();
  for (int n = 0; n <= spec.max_degree(); ++n) {
    hi = std::max(hi, spec.log_lambda[n] - log_area - eigen_lower_bound_log(n, spec.kp, 1.0));
  }
  return std::exp(hi);
}

double rkhs_norm_hard(double eps, int N, const EigenSpectrum& spec) {
  if (!(eps > 0.0)) throw std::invalid_argument("rkhs_norm_hard: eps must be positive");
  if (N < 0 || N > spec.max_degree())
    throw std::invalid_argument("rkhs_norm_hard: N outside the spectrum range");
  const double log_area = std::log(sphere_area(spec.kp.d));
  // log-sum-exp over mult_n / (|S^d| lambda_n)
  double peak = -std::numeric_limits<double>::infinity();
  for (int n = 0; n <= N; ++n) {
    peak = std::max(peak, std::log(static_cast<double>(spec.mult[n])) - log_area -
                              spec.log_lambda[n]);
  }
  double acc = 0.0;
  for (int n = 0; n <= N; ++n) {
    acc += std::exp(std::log(static_cast<double>(spec.mult[n])) - log_area -
                    spec.log_lambda[n] - peak);
  }
  const double log_sum = peak + std::log(acc);
  const double log_bpeak =
      std::log(static_cast<double>(harmonic_dim_cumulative(N, spec.kp.d + 1))) - log_area;
  return std::exp(std::log(2.0 * eps) - log_bpeak + 0.5 * log_sum);
}

int select_N_bar(double eps, double budget, const EigenSpectrum& spec) {
  if (!(budget > 0.0)) throw std::invalid_argument("select_N_bar: budget must be positive");
  if (!(eps > 0.0) || eps >= budget)
    throw std::invalid_argument("select_N_bar: need 0 < eps < budget");
  // The norm dips at small N (the peak grows faster than the eigen-sum), so
  // take the last admissible degree over the whole range, then certify that
  // the spectrum extends beyond it.
  int N = 0;
  for (int n = 1; n <= spec.max_degree(); ++n) {
    if (rkhs_norm_hard(eps, n, spec) <= budget) N = n;
  }
  if (N == 0) throw std::invalid_argument("select_N_bar: budget admits no N >= 1");
  if (N == spec.max_degree())
    throw NumericalError("select_N_bar: spectrum too short to certify the maximum");
  return N;
}

void to_json(nlohmann::json& j, const KernelParams& kp) {
  j = nlohmann::json{{"d", kp.d}, {"theta", kp.theta}};
}

void from_json(const nlohmann::json& j, KernelParams& kp) {
  j.at("d").get_to(kp.d);
  j.at("theta").get_to(kp.theta);
}

void to_json(nlohmann::json& j, const EigenSpectrum& s) {
  j = nlohmann::json{{"kernel", s.kp},
                     {"source", s.source == SpectrumSource::quadrature ? "quadrature" : "lower_bound"},
                     {"lambda", s.lambda},
                     {"log_lambda", s.log_lambda},
                     {"multiplicity", s.mult}};
}

void from_json(const nlohmann::json& j, EigenSpectrum& s) {
  j.at("kernel").get_to(s.kp);
  s.source = j.at("source").get<std::string>() == "quadrature" ? SpectrumSource::quadrature
                                                               : SpectrumSource::lower_bound;
  j.at("lambda").get_to(s.lambda);
  j.at("log_lambda").get_to(s.log_lambda);
  j.at("multiplicity").get_to(s.mult);
}

std::string spectrum_csv(const EigenSpectrum& s) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "n,lambda,log_lambda,multiplicity\n";
  char buf[64];
  for (int n = 0; n <= s.max_degree(); ++n) {
    std::snprintf(buf, sizeof(buf), "%.17g", s.lambda[n]);
    os << n << ',' << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", s.log_lambda[n]);
    os << buf << ',' << s.mult[n] << '\n';
  }
  return os.str();
}

}  // namespace hsgp
