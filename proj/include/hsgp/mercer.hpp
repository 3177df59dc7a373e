#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace hsgp {

// Squared-exponential kernel k(x,y) = exp(-||x-y||^2 / theta) restricted to S^d.
struct KernelParams {
  int d = 1;
  double theta = 1.0;
};

enum class SpectrumSource { quadrature, lower_bound };

// Eigenvalues of the kernel integral operator under the Lebesgue measure of
// S^d, indexed by harmonic degree, with multiplicities.
struct EigenSpectrum {
  KernelParams kp;
  SpectrumSource source = SpectrumSource::quadrature;
  std::vector<double> lambda;      // underflows to 0 only in the deep tail
  std::vector<double> log_lambda;  // always finite
  std::vector<std::int64_t> mult;
  int max_degree() const { return static_cast<int>(lambda.size()) - 1; }
};

// Closed-form decay bound lambda_n >= (2e/theta)^n C / (2n+d-1)^(n+d/2),
// in log space; the n=0, d=1 base is read as 1. C > 0 required.
double eigen_lower_bound_log(int n, const KernelParams& kp, double C);
double eigen_lower_bound(int n, const KernelParams& kp, double C);

// Single eigenvalue by extended-precision quadrature: the cosine transform of
// kappa(cos u) on the circle, or the weighted Legendre projection for d >= 2.
// Doubling the rule from `nodes` must move the result by less than 1e-10
// relative, otherwise NumericalError.
double eigen_quadrature(int n, const KernelParams& kp, int nodes = 128);
double eigen_quadrature_log(int n, const KernelParams& kp, int nodes = 128);

// Quadrature spectrum for degrees 0..n_max (cached per kernel).
EigenSpectrum build_spectrum(const KernelParams& kp, int n_max);

// Spectrum of closed-form lower bounds with constant C.
EigenSpectrum build_lower_bound_spectrum(const KernelParams& kp, int n_max, double C);

// Largest C with lambda_n >= bound(n, C) across the computed degrees, and the
// smallest Cbar with lambda_n <= |S^d| * bound(n, Cbar).
double fit_lower_constant(const EigenSpectrum& spec);
double fit_upper_constant(const EigenSpectrum& spec);

// RKHS norm of the degree-N peaked hard function at height 2 eps:
//   (2 eps / b_peak) sqrt( sum_{n<=N} mult_n / (|S^d| lambda_n) ),
// where b_peak = cumulative_dim(N) / |S^d|. Valid for 0 <= N <= max_degree.
double rkhs_norm_hard(double eps, int N, const EigenSpectrum& spec);

// Largest N >= 1 whose hard-function norm stays within the budget. Throws
// std::invalid_argument when even N = 1 exceeds the budget and NumericalError
// when the spectrum is too short to certify the maximum.
int select_N_bar(double eps, double budget, const EigenSpectrum& spec);

void to_json(nlohmann::json& j, const KernelParams& kp);
void from_json(const nlohmann::json& j, KernelParams& kp);
void to_json(nlohmann::json& j, const EigenSpectrum& s);
void from_json(const nlohmann::json& j, EigenSpectrum& s);

// CSV rows "n,lambda,log_lambda,multiplicity" with a header.
std::string spectrum_csv(const EigenSpectrum& s);

}  // namespace hsgp
