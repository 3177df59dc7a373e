#include "hsgp/gp_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hsgp/errors.hpp"
#include "hsgp/parallel.hpp"
#include "hsgp/special_functions.hpp"

namespace hsgp {

double se_kernel(const SpherePoint& x, const SpherePoint& y, double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("se_kernel: theta must be positive");
  return std::exp(-2.0 * (1.0 - dot(x, y)) / theta);
}

PosteriorState::PosteriorState(double theta, double noise_var)
    : theta_(theta), noise_var_(noise_var) {
  if (!(theta > 0.0)) throw std::invalid_argument("PosteriorState: theta must be positive");
  if (!(noise_var > 0.0)) throw std::invalid_argument("PosteriorState: noise_var must be positive");
}

void PosteriorState::append(const SpherePoint& x, double y) {
  const std::size_t t = pts_.size();
  std::vector<double> w(t);
  for (std::size_t i = 0; i < t; ++i) {
    double s = se_kernel(x, pts_[i], theta_);
    const double* row = lower_.data() + i * (i + 1) / 2;
    for (std::size_t j = 0; j < i; ++j) s -= row[j] * w[j];
    w[i] = s / row[i];
  }
  double norm2 = 0.0;
  for (double v : w) norm2 += v * v;

  double schur = 1.0 + noise_var_ - norm2;
  if (schur <= 0.0) {
    double jitter = 1e-10;
    while (jitter <= 1e-6 && schur + jitter <= 0.0) jitter *= 10.0;
    if (schur + jitter <= 0.0)
      throw NumericalError("PosteriorState::append: factorization lost positivity past jitter 1e-6");
    schur += jitter;
  }
  const double diag = std::sqrt(schur);

  double zy = y;
  for (std::size_t i = 0; i < t; ++i) zy -= w[i] * z_[i];
  lower_.insert(lower_.end(), w.begin(), w.end());
  lower_.push_back(diag);
  z_.push_back(zy / diag);
  pts_.push_back(x);
  log_det_ += std::log(schur / noise_var_);
}

Posterior PosteriorState::query(const SpherePoint& x) const {
  const std::size_t t = pts_.size();
  if (t == 0) return Posterior{0.0, 1.0};
  std::vector<double> v(t);
  for (std::size_t i = 0; i < t; ++i) {
    double s = se_kernel(x, pts_[i], theta_);
    const double* row = lower_.data() + i * (i + 1) / 2;
    for (std::size_t j = 0; j < i; ++j) s -= row[j] * v[j];
    v[i] = s / row[i];
  }
  double mean = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < t; ++i) {
    mean += v[i] * z_[i];
    vv += v[i] * v[i];
  }
  return Posterior{mean, std::max(0.0, 1.0 - vv)};
}

namespace {

PosteriorState state_of(const GPDataset& ds, double theta) {
  if (ds.points.size() != ds.observations.size())
    throw std::invalid_argument("GPDataset: points and observations must have equal length");
  PosteriorState st(theta, ds.noise_var);
  for (std::size_t i = 0; i < ds.points.size(); ++i) st.append(ds.points[i], ds.observations[i]);
  return st;
}

}  // namespace

Posterior posterior(const GPDataset& ds, double theta, const SpherePoint& x) {
  return state_of(ds, theta).query(x);
}

double info_gain(const GPDataset& ds, double theta) {
  return 0.5 * state_of(ds, theta).log_det();
}

namespace {

template <bool Parallel>
GreedyMigResult greedy_impl(int T, const std::vector<SpherePoint>& candidates,
                            double theta, double noise_var) {
  if (T < 1) throw std::invalid_argument("greedy_mig: T must be >= 1");
  if (!(noise_var > 0.0)) throw std::invalid_argument("greedy_mig: noise_var must be positive");
  const int C = static_cast<int>(candidates.size());
  if (C < T) throw std::invalid_argument("greedy_mig: need at least T candidates");

  // v[c] = L^{-1} k_c grows one entry per step; var[c] = 1 - ||v[c]||^2.
  // Selection is without replacement: a chosen row stops being updated and is
  // read one last time as the source of the step that chose it.
  std::vector<double> v(static_cast<std::size_t>(C) * T);
  std::vector<double> var(C, 1.0);
  std::vector<char> chosen(C, 0);
  GreedyMigResult out;
  out.points.reserve(T);
  out.indices.reserve(T);
  out.gain_curve.reserve(T);

  double gain = 0.0;
  for (int t = 0; t < T; ++t) {
    int sel = -1;
    for (int c = 0; c < C; ++c)
      if (!chosen[c] && (sel < 0 || var[c] > var[sel])) sel = c;
    chosen[sel] = 1;

    gain += 0.5 * std::log1p(std::max(0.0, var[sel]) / noise_var);
    out.indices.push_back(sel);
    out.points.push_back(candidates[sel]);
    out.gain_curve.push_back(gain);
    if (t + 1 == T) break;

    const double diag = std::sqrt(noise_var + std::max(0.0, var[sel]));
    const double* vs = v.data() + static_cast<std::size_t>(sel) * T;
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (Parallel)
    for (int c = 0; c < C; ++c) {
      if (chosen[c]) continue;
      double* vc = v.data() + static_cast<std::size_t>(c) * T;
      double s = se_kernel(candidates[c], candidates[sel], theta);
      for (int j = 0; j < t; ++j) s -= vc[j] * vs[j];
      const double vnew = s / diag;
      vc[t] = vnew;
      var[c] -= vnew * vnew;
    }
  }
  return out;
}

}  // namespace

GreedyMigResult greedy_mig(int T, const std::vector<SpherePoint>& candidates,
                           double theta, double noise_var) {
  return greedy_impl<true>(T, candidates, theta, noise_var);
}

GreedyMigResult greedy_mig_serial(int T, const std::vector<SpherePoint>& candidates,
                                  double theta, double noise_var) {
  return greedy_impl<false>(T, candidates, theta, noise_var);
}

namespace {

// Fit of ln lambda_n <= shape(n) + lc over the spectrum's last 10 degrees.
double tail_log_constant(const EigenSpectrum& spectrum) {
  const int n_max = spectrum.max_degree();
  double lc = -1e300;
  for (int n = std::max(1, n_max - 9); n <= n_max; ++n)
    lc = std::max(lc, spectrum.log_lambda[n] - eigen_lower_bound_log(n, spectrum.kp, 1.0));
  return lc;
}

}  // namespace

double mig_bound(int T, int M, const EigenSpectrum& spectrum, double noise_var, int d) {
  if (T < 1) throw std::invalid_argument("mig_bound: T must be >= 1");
  if (M < 0) throw std::invalid_argument("mig_bound: M must be >= 0");
  if (!(noise_var > 0.0)) throw std::invalid_argument("mig_bound: noise_var must be positive");
  if (d != spectrum.kp.d) throw std::invalid_argument("mig_bound: d does not match the spectrum");
  const int n_max = spectrum.max_degree();
  if (M > n_max - 5) throw std::range_error("mig_bound: tail not certifiable, M within 5 degrees of the spectrum end");

  const double head =
      static_cast<double>(harmonic_dim_cumulative(M, d + 1)) * std::log1p(T / noise_var);

  double tail = 0.0;
  for (int n = M + 1; n <= n_max; ++n)
    tail += spectrum.lambda[n] * static_cast<double>(spectrum.mult[n]);

  // Analytic majorant beyond the computed degrees; superexponential decay is
  // certified by demanding each term at most halve the previous one.
  const double lc = tail_log_constant(spectrum);
  double prev = 1e300;
  for (int n = n_max + 1; n <= n_max + 2000; ++n) {
    const double term = static_cast<double>(harmonic_dim(n, d + 1)) *
                        std::exp(eigen_lower_bound_log(n, spectrum.kp, 1.0) + lc);
    if (n <= n_max + 3 && term > 0.5 * prev)
      throw std::range_error("mig_bound: tail not certifiable, majorant terms do not halve");
    tail += term;
    if (term < 1e-280) break;
    prev = term;
  }

  return head + T / (sphere_area(d) * noise_var) * tail;
}

std::pair<double, int> mig_bound_min(int T, const EigenSpectrum& spectrum,
                                     double noise_var, int d) {
  const int top = spectrum.max_degree() - 5;
  if (top < 0) throw std::range_error("mig_bound_min: spectrum too short");
  double best = 1e300;
  int best_M = 0;
  for (int M = 0; M <= top; ++M) {
    const double b = mig_bound(T, M, spectrum, noise_var, d);
    if (b < best) {
      best = b;
      best_M = M;
    }
  }
  return {best, best_M};
}

int select_M(int T, int d, double c, double cU) {
  if (T < 3) throw std::invalid_argument("select_M: T must be >= 3");
  if (d < 1) throw std::invalid_argument("select_M: d must be >= 1");
  if (!(c > 0.0) || !(cU > 0.0)) throw std::invalid_argument("select_M: constants must be positive");
  const double ln_T = std::log(static_cast<double>(T));
  for (int M = 1; M <= (1 << 20); ++M) {
    const double value = M * std::log(c * M);
    if (value >= ln_T) {
      if (value > cU * ln_T)
        throw std::range_error("select_M: sandwich infeasible, raise cU");
      return M;
    }
  }
  throw std::range_error("select_M: no admissible M found");
}

}  // namespace hsgp
