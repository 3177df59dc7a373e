#pragma once

#include <cstdint>
#include <stdexcept>

namespace hsgp {

// Gegenbauer polynomial C_n^(eta)(t) via the three-term recurrence
//   n C_n = 2t(n+eta-1) C_{n-1} - (n+2eta-2) C_{n-2}.
// Requires eta > 0; arguments within 1e-12 of [-1,1] are clipped onto it.
double gegenbauer(int n, double eta, double t);

// C_n^(eta)(1) = Gamma(n+2eta) / (Gamma(n+1) Gamma(2eta)), evaluated in
// log-gamma space so large n and eta do not overflow intermediates.
double gegenbauer_at_one(int n, double eta);

// Legendre polynomial P_{n,d+1}(t) normalised to P(1) = 1, dplus1 = d+1.
// dplus1 == 2 evaluates cos(n arccos t); dplus1 >= 3 uses the explicit
// alternating sum over k <= n/2 with log-gamma coefficients.
double legendre_sphere(int n, int dplus1, double t);

// 1 + 2 sum_{n<=N} cos(nt) = sin((N+1/2)t) / sin(t/2) for t in (0, pi];
// returns 1+2N at t = 0.
double dirichlet(int N, double t);

// Dimension of the space of degree-n spherical harmonics on S^d, dplus1 = d+1.
// Exact integer arithmetic; throws std::overflow_error beyond the int64 range.
std::int64_t harmonic_dim(int n, int dplus1);

// sum_{m=0..n} harmonic_dim(m, dplus1). Equals harmonic_dim(n, dplus1 + 1).
std::int64_t harmonic_dim_cumulative(int n, int dplus1);

// Surface area of the unit sphere S^d embedded in R^{d+1}.
double sphere_area(int d);

// Physicists' Hermite polynomial H_n(x).
double hermite(int n, double x);

// P_{n,d+1}(t) through the recurrence
//   (n+d-1) P_{n+1} = (2n+d-1) t P_n - n P_{n-1},  P_0 = 1, P_1 = t.
// Templated so the Mercer quadrature can run it in extended precision.
template <class Real>
Real legendre_sphere_recurrence(int n, int dplus1, const Real& t) {
  if (n < 0 || dplus1 < 2) throw std::domain_error("legendre_sphere_recurrence: bad n or dplus1");
  const int d = dplus1 - 1;
  if (n == 0) return Real(1);
  Real pm = Real(1);
  Real p = t;
  for (int k = 1; k < n; ++k) {
    Real pn = ((2 * k + d - 1) * t * p - k * pm) / (k + d - 1);
    pm = p;
    p = pn;
  }
  return p;
}

}  // namespace hsgp
