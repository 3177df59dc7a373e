#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "hsgp/mercer.hpp"
#include "hsgp/sphere_geometry.hpp"

namespace hsgp {

// k(x, y) = exp(-||x - y||^2 / theta); on the sphere ||x - y||^2 = 2(1 - x.y).
double se_kernel(const SpherePoint& x, const SpherePoint& y, double theta);

struct GPDataset {
  std::vector<SpherePoint> points;
  std::vector<double> observations;
  double noise_var = 1.0;
};

struct Posterior {
  double mean = 0.0;
  double variance = 1.0;
};

// Incrementally grown Cholesky factor of K + noise_var I with the running
// log-det of (I + K / noise_var). A new diagonal entry that loses positivity
// to rounding gets jitter 1e-10, escalating tenfold up to 1e-6; past that the
// append throws NumericalError.
class PosteriorState {
 public:
  PosteriorState(double theta, double noise_var);

  void append(const SpherePoint& x, double y);
  std::size_t size() const { return pts_.size(); }
  double log_det() const { return log_det_; }

  // Prior (0, 1) when empty. The variance is clamped at zero; it can reach
  // the clamp only through catastrophic cancellation at tiny noise.
  Posterior query(const SpherePoint& x) const;

 private:
  double theta_;
  double noise_var_;
  std::vector<SpherePoint> pts_;
  std::vector<double> lower_;  // packed row-major lower triangle
  std::vector<double> z_;      // L^{-1} y
  double log_det_ = 0.0;
};

// One-shot wrappers over PosteriorState.
Posterior posterior(const GPDataset& ds, double theta, const SpherePoint& x);

// (1/2) ln det(I + K_T / noise_var); empty dataset gives 0.
double info_gain(const GPDataset& ds, double theta);

struct GreedyMigResult {
  std::vector<SpherePoint> points;
  std::vector<int> indices;
  std::vector<double> gain_curve;  // gain after 1, 2, ..., T picks
};

// Greedy empirical information-gain maximization over a candidate pool:
// each step takes the not-yet-chosen candidate of maximum posterior variance
// (ties resolve to the lowest index). Requires candidates.size() >= T.
GreedyMigResult greedy_mig(int T, const std::vector<SpherePoint>& candidates,
                           double theta, double noise_var);
GreedyMigResult greedy_mig_serial(int T, const std::vector<SpherePoint>& candidates,
                                  double theta, double noise_var);

// Spectral bound on the maximum information gain at truncation degree M:
//   cumdim(M) ln(1 + T / noise_var)
//   + (T / (|S^d| noise_var)) sum_{n > M} lambda_n N_{n,d+1}.
// The sum uses the quadrature spectrum through its last degree and an
// analytic-decay majorant beyond it, with the majorant constant fitted to the
// spectrum's last 10 degrees. Throws std::range_error when the tail cannot be
// certified (M within 5 degrees of the spectrum end, or the majorant terms
// fail to halve).
double mig_bound(int T, int M, const EigenSpectrum& spectrum, double noise_var, int d);

// Minimum of mig_bound over admissible M, with the argmin.
std::pair<double, int> mig_bound_min(int T, const EigenSpectrum& spectrum,
                                     double noise_var, int d);

// Smallest M >= 1 with M ln(c M) >= ln T. Throws std::range_error when that M
// overshoots cU ln T (raise cU), std::invalid_argument for T < 3.
int select_M(int T, int d, double c, double cU);

}  // namespace hsgp
