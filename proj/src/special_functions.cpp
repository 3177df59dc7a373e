#include "hsgp/special_functions.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hsgp {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kClipTol = 1e-12;

double clip_unit(double t, const char* who) {
  if (t > 1.0) {
    if (t > 1.0 + kClipTol) throw std::domain_error(std::string(who) + ": t outside [-1, 1]");
    return 1.0;
  }
  if (t < -1.0) {
    if (t < -1.0 - kClipTol) throw std::domain_error(std::string(who) + ": t outside [-1, 1]");
    return -1.0;
  }
  return t;
}

}  // namespace

double gegenbauer(int n, double eta, double t) {
  if (n < 0) throw std::domain_error("gegenbauer: n must be nonnegative");
  if (!(eta > 0.0)) throw std::domain_error("gegenbauer: eta must be positive");
  t = clip_unit(t, "gegenbauer");
  if (n == 0) return 1.0;
  double ym = 1.0;
  double y = 2.0 * eta * t;
  for (int k = 2; k <= n; ++k) {
    const double yn = (2.0 * t * (k + eta - 1.0) * y - (k + 2.0 * eta - 2.0) * ym) / k;
    ym = y;
    y = yn;
  }
  return y;
}

double gegenbauer_at_one(int n, double eta) {
  if (n < 0) throw std::domain_error("gegenbauer_at_one: n must be nonnegative");
  if (!(eta > 0.0)) throw std::domain_error("gegenbauer_at_one: eta must be positive");
  return std::exp(std::lgamma(n + 2.0 * eta) - std::lgamma(n + 1.0) - std::lgamma(2.0 * eta));
}

double legendre_sphere(int n, int dplus1, double t) {
  if (n < 0) throw std::domain_error("legendre_sphere: n must be nonnegative");
  if (dplus1 < 2) throw std::domain_error("legendre_sphere: dplus1 must be >= 2");
  t = clip_unit(t, "legendre_sphere");
  const int d = dplus1 - 1;
  if (d == 1) return std::cos(n * std::acos(t));
  // Signed coefficients advance by an exact ratio so no lgamma roundoff is
  // amplified by the alternating cancellation; accumulate in long double.
  const long double om = 1.0L - static_cast<long double>(t) * t;
  long double coef = 1.0L;
  long double sum = 0.0L;
  for (int k = 0; k <= n / 2; ++k) {
    sum += coef * std::pow(om, static_cast<long double>(k)) *
           std::pow(static_cast<long double>(t), static_cast<long double>(n - 2 * k));
    coef *= -static_cast<long double>(n - 2 * k) * (n - 2 * k - 1) /
            (4.0L * (k + 1) * (k + 0.5L * d));
  }
  return static_cast<double>(sum);
}

double dirichlet(int N, double t) {
  if (N < 0) throw std::domain_error("dirichlet: N must be nonnegative");
  if (t < 0.0 || t > kPi + kClipTol) throw std::domain_error("dirichlet: t outside [0, pi]");
  if (t == 0.0) return 1.0 + 2.0 * N;
  return std::sin((N + 0.5) * t) / std::sin(0.5 * t);
}

std::int64_t harmonic_dim(int n, int dplus1) {
  const int d = dplus1 - 1;
  if (n < 0 || d < 1) throw std::domain_error("harmonic_dim: need n >= 0 and dplus1 >= 2");
  if (n == 0) return 1;
  if (d == 1) return 2;
  // (2n+d-1) * prod_{i=1..d-2} (n+i) / (d-1)!
  const unsigned __int128 cap = static_cast<unsigned __int128>(1) << 120;
  unsigned __int128 num = static_cast<unsigned>(2 * n + d - 1);
  for (int i = 1; i <= d - 2; ++i) {
    if (num > cap / static_cast<unsigned>(n + i)) throw std::overflow_error("harmonic_dim: overflow");
    num *= static_cast<unsigned>(n + i);
  }
  unsigned __int128 den = 1;
  for (int i = 2; i <= d - 1; ++i) den *= static_cast<unsigned>(i);
  num /= den;
  if (num > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max()))
    throw std::overflow_error("harmonic_dim: exceeds int64 range");
  return static_cast<std::int64_t>(num);
}

std::int64_t harmonic_dim_cumulative(int n, int dplus1) {
  std::int64_t sum = 0;
  for (int m = 0; m <= n; ++m) {
    const std::int64_t term = harmonic_dim(m, dplus1);
    if (sum > std::numeric_limits<std::int64_t>::max() - term)
      throw std::overflow_error("harmonic_dim_cumulative: exceeds int64 range");
    sum += term;
  }
  return sum;
}

double sphere_area(int d) {
  if (d < 1) throw std::domain_error("sphere_area: d must be >= 1");
  return 2.0 * std::pow(kPi, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
}

double hermite(int n, double x) {
  if (n < 0) throw std::domain_error("hermite: n must be nonnegative");
  if (n == 0) return 1.0;
  double hm = 1.0;
  double h = 2.0 * x;
  for (int k = 2; k <= n; ++k) {
    const double hn = 2.0 * x * h - 2.0 * (k - 1) * hm;
    hm = h;
    h = hn;
  }
  return h;
}

}  // namespace hsgp
