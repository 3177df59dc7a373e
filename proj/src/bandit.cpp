#include "hsgp/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "hsgp/errors.hpp"
#include "hsgp/gp_engine.hpp"
#include "hsgp/rng.hpp"
#include "hsgp/parallel.hpp"

namespace hsgp {

namespace {

constexpr double kWilsonZ = 1.959963984540054;  // 95% two-sided normal quantile

double wilson_lower(int hits, int n) {
  const double p = static_cast<double>(hits) / n;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / n;
  const double center = p + z2 / (2.0 * n);
  const double rad = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return std::max(0.0, (center - rad) / denom);
}

double wilson_upper(int hits, int n) {
  const double p = static_cast<double>(hits) / n;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / n;
  const double center = p + z2 / (2.0 * n);
  const double rad = kWilsonZ * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return std::min(1.0, (center + rad) / denom);
}

}  // namespace

Environment make_environment(SphereFunction objective, double noise_std,
                             double optimum, int d, std::uint64_t seed) {
  if (!objective) throw std::invalid_argument("make_environment: empty objective");
  if (noise_std < 0.0) throw std::invalid_argument("make_environment: noise_std must be >= 0");
  if (d < 1) throw std::invalid_argument("make_environment: d must be >= 1");
  const double slack = 1e-9 * std::max(1.0, std::abs(optimum));
  for (const SpherePoint& x : sample_uniform(d, 10000, seed))
    if (objective(x) > optimum + slack)
      throw std::invalid_argument("make_environment: sampled value above the claimed optimum");
  return Environment{std::move(objective), noise_std, optimum, d};
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::gp_ucb: return "gp_ucb";
    case Algorithm::max_variance: return "max_variance";
    case Algorithm::random_search: return "random";
  }
  throw std::invalid_argument("to_string: unknown algorithm");
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "gp_ucb") return Algorithm::gp_ucb;
  if (name == "max_variance") return Algorithm::max_variance;
  if (name == "random") return Algorithm::random_search;
  throw std::invalid_argument("unknown algorithm: " + name);
}

double gp_ucb_beta(const EpisodeParams& params, int t, std::size_t candidates) {
  if (params.beta_scale > 0.0) return params.beta_scale;
  return 2.0 * std::log(static_cast<double>(candidates) * t * static_cast<double>(t));
}

RegretTrace run_episode(Algorithm algorithm, const Environment& env, int T,
                        const std::vector<SpherePoint>& candidates,
                        const EpisodeParams& params, std::uint64_t seed,
                        const SpherePartition* partition) {
  if (T < 1) throw std::invalid_argument("run_episode: T must be >= 1");
  if (candidates.empty()) throw std::invalid_argument("run_episode: empty candidate pool");
  const int C = static_cast<int>(candidates.size());
  // Noise-free play still needs a positive model variance to factorize.
  const double model_var = std::max(env.noise_std * env.noise_std, 1e-8);

  // Incremental posterior over the fixed pool: v[c] = L^{-1} k_c and
  // z = L^{-1} y grow one entry per step, mean_c = v_c . z,
  // var_c = 1 - ||v_c||^2.
  std::vector<double> v(static_cast<std::size_t>(C) * T);
  std::vector<double> var(C, 1.0), mean(C, 0.0), z(T);

  auto noise_rng = make_rng(seed, 0);
  auto alg_rng = make_rng(seed, 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, C - 1);

  RegretTrace trace;
  trace.points.reserve(T);
  trace.observations.reserve(T);
  trace.inst_regret.reserve(T);
  if (partition) trace.region_counts.assign(partition->size(), 0);

  for (int t = 0; t < T; ++t) {
    int sel = 0;
    switch (algorithm) {
      case Algorithm::gp_ucb: {
        const double beta = gp_ucb_beta(params, t + 1, candidates.size());
        double best = -1e300;
        for (int c = 0; c < C; ++c) {
          const double score = mean[c] + beta * std::sqrt(std::max(0.0, var[c]));
          if (score > best) { best = score; sel = c; }
        }
        break;
      }
      case Algorithm::max_variance:
        for (int c = 1; c < C; ++c)
          if (var[c] > var[sel]) sel = c;
        break;
      case Algorithm::random_search:
        sel = pick(alg_rng);
        break;
    }

    const SpherePoint& x = candidates[sel];
    const double fx = env.objective(x);
    const double y = fx + env.noise_std * gauss(noise_rng);
    trace.points.push_back(x);
    trace.observations.push_back(y);
    trace.inst_regret.push_back(env.optimum - fx);
    trace.cumulative_regret += env.optimum - fx;
    if (partition) ++trace.region_counts[partition->assign(x)];

    const double diag = std::sqrt(model_var + std::max(0.0, var[sel]));
    const double* vs = v.data() + static_cast<std::size_t>(sel) * T;
    double zdot = 0.0;
    for (int j = 0; j < t; ++j) zdot += vs[j] * z[j];
    const double znew = (y - zdot) / diag;
    z[t] = znew;
    for (int c = 0; c < C; ++c) {
      double* vc = v.data() + static_cast<std::size_t>(c) * T;
      double s = se_kernel(candidates[c], x, params.theta);
      for (int j = 0; j < t; ++j) s -= vc[j] * vs[j];
      const double vnew = s / diag;
      vc[t] = vnew;
      var[c] -= vnew * vnew;
      mean[c] += vnew * znew;
    }
  }

  int best = 0;
  for (int c = 1; c < C; ++c)
    if (mean[c] > mean[best]) best = c;
  trace.reported = candidates[best];
  trace.simple_regret = env.optimum - env.objective(trace.reported);
  return trace;
}

double kl_gaussian(double mu1, double mu2, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("kl_gaussian: sigma must be positive");
  const double diff = mu1 - mu2;
  return diff * diff / (2.0 * sigma * sigma);
}

namespace {

template <bool Parallel>
std::vector<double> max_kl_impl(const SphereFunction& f, const SphereFunction& f_tilde,
                                const SpherePartition& partition, double sigma,
                                std::size_t samples, std::uint64_t seed) {
  if (!(sigma > 0.0)) throw std::domain_error("max_kl_per_region: sigma must be positive");
  if (samples < 1000) throw std::invalid_argument("max_kl_per_region: need >= 1000 samples per region");
  const int m = partition.size();
  const int d = partition.centers.d;

  std::vector<SpherePoint> pts = sample_uniform(d, samples * m, seed);
  for (const SpherePoint& c : partition.centers.centers) {
    pts.push_back(c);
    pts.push_back(antipode(c));
  }
  const int n = static_cast<int>(pts.size());
  std::vector<double> kl(n);
  std::vector<int> region(n);
#pragma omp parallel for schedule(static) num_threads(max_threads()) if (Parallel)
  for (int i = 0; i < n; ++i) {
    kl[i] = kl_gaussian(f(pts[i]), f_tilde(pts[i]), sigma);
    region[i] = partition.assign(pts[i]);
  }

  std::vector<double> out(m, 0.0);
  for (int i = 0; i < n; ++i) out[region[i]] = std::max(out[region[i]], kl[i]);
  return out;
}

}  // namespace

std::vector<double> max_kl_per_region(const SphereFunction& f, const SphereFunction& f_tilde,
                                      const SpherePartition& partition, double sigma,
                                      std::size_t samples, std::uint64_t seed) {
  return max_kl_impl<true>(f, f_tilde, partition, sigma, samples, seed);
}

std::vector<double> max_kl_per_region_serial(const SphereFunction& f,
                                             const SphereFunction& f_tilde,
                                             const SpherePartition& partition, double sigma,
                                             std::size_t samples, std::uint64_t seed) {
  return max_kl_impl<false>(f, f_tilde, partition, sigma, samples, seed);
}

CertificateReport certify_change_of_measure(Algorithm algorithm, const FunctionClass& fc,
                                            int i, int j, int T, double delta, int trials,
                                            CertifyEvent event, double sigma,
                                            const EpisodeParams& params, std::uint64_t seed) {
  if (trials < 30) throw std::invalid_argument("certify_change_of_measure: need >= 30 trials");
  if (!(delta > 0.0 && delta < 1.0 / 3.0))
    throw std::invalid_argument("certify_change_of_measure: delta must lie in (0, 1/3)");
  if (i < 0 || i >= fc.size() || j < 0 || j >= fc.size())
    throw std::out_of_range("certify_change_of_measure: member index out of range");
  if (T < 1) throw std::invalid_argument("certify_change_of_measure: T must be >= 1");
  if (!(sigma > 0.0)) throw std::domain_error("certify_change_of_measure: sigma must be positive");

  const int d = fc.partition.centers.d;
  const HardFunction& base = fc.functions[i];
  SphereFunction f = [&base](const SpherePoint& x) { return base.evaluate(x); };
  SphereFunction f_tilde = f;
  double tilde_opt = 2.0 * fc.eps;
  if (i != j) {
    f_tilde = adversarial_pair(fc, i, j).second;
    tilde_opt = 2.0 * fc.eps + 2.0 * base.evaluate(fc.functions[j].z);
  }

  const Environment env_f = make_environment(f, sigma, 2.0 * fc.eps, d, derive_seed(seed, 2));
  // The perturbed optimum is only carried through unused regret fields, so
  // the sampled-maximum check is skipped for it.
  const Environment env_tilde{f_tilde, sigma, tilde_opt, d};

  std::vector<SpherePoint> pool = fc.partition.centers.centers;
  const int extra = std::max(64, 4 * fc.size());
  for (SpherePoint& p : sample_uniform(d, extra, derive_seed(seed, 3)))
    pool.push_back(std::move(p));

  const auto hit = [&](const RegretTrace& tr) -> bool {
    if (event == CertifyEvent::report_in_region)
      return fc.partition.assign(tr.reported) == j;
    return 2 * tr.region_counts[j] >= T;
  };

  const int total = 2 * trials;
  std::vector<char> hits(total, 0);
  std::vector<std::vector<std::int64_t>> counts(trials);
#pragma omp parallel for schedule(dynamic) num_threads(max_threads())
  for (int k = 0; k < total; ++k) {
    const bool under_f = k < trials;
    const RegretTrace tr =
        run_episode(algorithm, under_f ? env_f : env_tilde, T, pool, params,
                    derive_seed(seed, 100 + k), &fc.partition);
    hits[k] = hit(tr) ? 1 : 0;
    if (under_f) counts[k] = tr.region_counts;
  }

  CertificateReport report;
  int hf = 0, ht = 0;
  for (int k = 0; k < trials; ++k) hf += hits[k];
  for (int k = trials; k < total; ++k) ht += hits[k];
  report.p_f = static_cast<double>(hf) / trials;
  report.p_f_tilde = static_cast<double>(ht) / trials;
  report.p_f_lower = wilson_lower(hf, trials);
  report.p_f_upper = wilson_upper(hf, trials);
  report.p_f_tilde_lower = wilson_lower(ht, trials);
  report.p_f_tilde_upper = wilson_upper(ht, trials);

  report.mean_counts_f.assign(fc.size(), 0.0);
  for (int k = 0; k < trials; ++k)
    for (int r = 0; r < fc.size(); ++r)
      report.mean_counts_f[r] += static_cast<double>(counts[k][r]) / trials;

  report.kl_sup = max_kl_per_region(f, f_tilde, fc.partition, sigma, 2000, derive_seed(seed, 4));
  report.lhs = 0.0;
  for (int r = 0; r < fc.size(); ++r) report.lhs += report.mean_counts_f[r] * report.kl_sup[r];
  report.rhs = std::log(1.0 / (2.4 * delta));

  report.premises_met =
      (report.p_f_lower >= 1.0 - delta && report.p_f_tilde_upper <= delta) ||
      (report.p_f_upper <= delta && report.p_f_tilde_lower >= 1.0 - delta);
  report.verdict = !report.premises_met ? "premises not met"
                   : report.lhs >= report.rhs ? "certified"
                                              : "violated";
  return report;
}

namespace {

template <bool Parallel>
std::vector<double> worst_regret_impl(Algorithm algorithm, const FunctionClass& fc, int T,
                                      const std::vector<SpherePoint>& candidates,
                                      const EpisodeParams& params, double sigma, int trials,
                                      std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("worst_member_regret: trials must be >= 1");
  const int m = fc.size();
  const int d = fc.partition.centers.d;
  std::vector<Environment> envs;
  envs.reserve(m);
  for (int k = 0; k < m; ++k) {
    const HardFunction& member = fc.functions[k];
    envs.push_back(make_environment(
        [&member](const SpherePoint& x) { return member.evaluate(x); }, sigma,
        2.0 * fc.eps, d, derive_seed(seed, 10 + k)));
  }

  const int total = trials * m;
  std::vector<double> regret(total);
#pragma omp parallel for schedule(dynamic) num_threads(max_threads()) if (Parallel)
  for (int idx = 0; idx < total; ++idx) {
    const int trial = idx / m;
    const int member = idx % m;
    regret[idx] = run_episode(algorithm, envs[member], T, candidates, params,
                              derive_seed(seed, trial))
                      .cumulative_regret;
  }

  std::vector<double> out(trials, -1e300);
  for (int idx = 0; idx < total; ++idx)
    out[idx / m] = std::max(out[idx / m], regret[idx]);
  return out;
}

}  // namespace

std::vector<double> worst_member_regret(Algorithm algorithm, const FunctionClass& fc, int T,
                                        const std::vector<SpherePoint>& candidates,
                                        const EpisodeParams& params, double sigma, int trials,
                                        std::uint64_t seed) {
  return worst_regret_impl<true>(algorithm, fc, T, candidates, params, sigma, trials, seed);
}

std::vector<double> worst_member_regret_serial(Algorithm algorithm, const FunctionClass& fc,
                                               int T, const std::vector<SpherePoint>& candidates,
                                               const EpisodeParams& params, double sigma,
                                               int trials, std::uint64_t seed) {
  return worst_regret_impl<false>(algorithm, fc, T, candidates, params, sigma, trials, seed);
}

double eps_schedule(int T, double sigma, double B, double delta, int d,
                    const EigenSpectrum& spectrum, const KernelParams& kp) {
  if (T < 1) throw std::invalid_argument("eps_schedule: T must be >= 1");
  if (!(sigma > 0.0)) throw std::invalid_argument("eps_schedule: sigma must be positive");
  if (!(B > 0.0)) throw std::invalid_argument("eps_schedule: B must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("eps_schedule: delta must lie in (0,1)");
  if (d != kp.d || d != spectrum.kp.d)
    throw std::invalid_argument("eps_schedule: dimension does not match the spectrum");
  const double lg = std::log(1.0 / delta);
  if (sigma * sigma * lg / (B * B) > T / 100.0)
    throw std::domain_error("eps_schedule: sigma^2 ln(1/delta) too large for this horizon");

  constexpr double kCalibration = 1.0;
  // Fixed points above B/e would make ln ln(B/eps) nonpositive; iterates are
  // clamped below that ceiling and convergence is judged afterwards.
  const double ceiling = B * std::exp(-1.0) * (1.0 - 1e-9);
  double eps = B / 8.0;
  for (int it = 0; it < 200; ++it) {
    const double r = std::log(B / eps);
    const double next = std::min(
        ceiling, 0.5 * kCalibration *
                     std::sqrt(sigma * sigma / T * std::pow(r, d) *
                               std::pow(std::log(r), -d) * lg));
    const bool done = std::abs(next - eps) <= 1e-6 * next;
    eps = next;
    if (done) {
      if (!(eps < B / 2.0))
        throw std::domain_error("eps_schedule: fixed point not below B/2");
      select_N_bar(eps, B / 3.0, spectrum);  // class must be constructible
      return eps;
    }
  }
  throw NumericalError("eps_schedule: no fixed point after 200 iterations");
}

void to_json(nlohmann::json& out, const CertificateReport& report) {
  out = nlohmann::json{{"p_f", report.p_f},
                       {"p_f_tilde", report.p_f_tilde},
                       {"p_f_lower", report.p_f_lower},
                       {"p_f_upper", report.p_f_upper},
                       {"p_f_tilde_lower", report.p_f_tilde_lower},
                       {"p_f_tilde_upper", report.p_f_tilde_upper},
                       {"mean_counts_f", report.mean_counts_f},
                       {"kl_sup", report.kl_sup},
                       {"lhs", report.lhs},
                       {"rhs", report.rhs},
                       {"premises_met", report.premises_met},
                       {"verdict", report.verdict}};
}

}  // namespace hsgp
