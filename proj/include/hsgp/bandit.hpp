#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsgp/hard_instances.hpp"
#include "hsgp/mercer.hpp"
#include "hsgp/sphere_geometry.hpp"

namespace hsgp {

// Noisy zeroth-order oracle: queries return objective(x) + N(0, noise_std^2).
// Construction samples the objective at 10^4 uniform points and refuses an
// optimum below any sampled value.
struct Environment {
  SphereFunction objective;
  double noise_std = 1.0;
  double optimum = 0.0;
  int d = 1;
};

Environment make_environment(SphereFunction objective, double noise_std,
                             double optimum, int d, std::uint64_t seed);

enum class Algorithm { gp_ucb, max_variance, random_search };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct EpisodeParams {
  double theta = 1.0;
  // Multiplier of the posterior standard deviation at step t with C
  // candidates; zero scale means the default 2 ln(C t^2).
  double beta_scale = 0.0;
};

struct RegretTrace {
  std::vector<SpherePoint> points;
  std::vector<double> observations;
  std::vector<double> inst_regret;
  double cumulative_regret = 0.0;
  SpherePoint reported;
  double simple_regret = 0.0;
  std::vector<std::int64_t> region_counts;  // empty without a partition
};

double gp_ucb_beta(const EpisodeParams& params, int t, std::size_t candidates);

// One bandit episode of T queries restricted to the candidate pool. gp_ucb
// picks argmax of mean + beta_t * std, max_variance ignores observations,
// random_search draws uniform candidate indices. All ties resolve to the
// lowest index; the reported maximizer is the final posterior-mean argmax.
// The noise stream depends only on (seed), not on the algorithm's choices,
// so two objectives compared under one seed see identical noise.
RegretTrace run_episode(Algorithm algorithm, const Environment& env, int T,
                        const std::vector<SpherePoint>& candidates,
                        const EpisodeParams& params, std::uint64_t seed,
                        const SpherePartition* partition = nullptr);

double kl_gaussian(double mu1, double mu2, double sigma);

// Per-region supremum of KL(N(f(x), sigma^2) || N(f_tilde(x), sigma^2)),
// estimated over samples-per-region uniform draws plus each region's center
// and its antipode.
std::vector<double> max_kl_per_region(const SphereFunction& f,
                                      const SphereFunction& f_tilde,
                                      const SpherePartition& partition,
                                      double sigma, std::size_t samples,
                                      std::uint64_t seed = 0x5eed);
std::vector<double> max_kl_per_region_serial(const SphereFunction& f,
                                             const SphereFunction& f_tilde,
                                             const SpherePartition& partition,
                                             double sigma, std::size_t samples,
                                             std::uint64_t seed = 0x5eed);

// Empirical check of the change-of-measure inequality: when the event A
// separates the two measures (likely under one at >= 1-delta, unlikely under
// the other at <= delta, both at Wilson 95% confidence; complementing A
// leaves the bound unchanged, so either orientation counts), the
// visit-weighted KL sum must reach ln(1/(2.4 delta)). The events fire on
// member j's region: the reported maximizer lands there, or at least half
// the queries do.
enum class CertifyEvent { report_in_region, half_queries_in_region };

struct CertificateReport {
  double p_f = 0.0;        // empirical P_f(A)
  double p_f_tilde = 0.0;  // empirical P_f_tilde(A)
  double p_f_lower = 0.0;  // Wilson 95% bounds used by the premise check
  double p_f_upper = 1.0;
  double p_f_tilde_lower = 0.0;
  double p_f_tilde_upper = 1.0;
  std::vector<double> mean_counts_f;  // per-region mean N_j under f
  std::vector<double> kl_sup;         // per-region sup KL
  double lhs = 0.0;
  double rhs = 0.0;
  bool premises_met = false;
  std::string verdict;  // "certified", "violated", or "premises not met"
};

CertificateReport certify_change_of_measure(Algorithm algorithm,
                                            const FunctionClass& fc, int i,
                                            int j, int T, double delta,
                                            int trials, CertifyEvent event,
                                            double sigma,
                                            const EpisodeParams& params,
                                            std::uint64_t seed);

// Worst-over-class cumulative regret: every member is played with the same
// per-trial noise stream and the per-trial maximum over members is returned,
// one entry per trial.
std::vector<double> worst_member_regret(Algorithm algorithm,
                                        const FunctionClass& fc, int T,
                                        const std::vector<SpherePoint>& candidates,
                                        const EpisodeParams& params,
                                        double sigma, int trials,
                                        std::uint64_t seed);
std::vector<double> worst_member_regret_serial(Algorithm algorithm,
                                               const FunctionClass& fc, int T,
                                               const std::vector<SpherePoint>& candidates,
                                               const EpisodeParams& params,
                                               double sigma, int trials,
                                               std::uint64_t seed);

// Self-consistent accuracy target: the fixed point of
//   eps = (calibration/2) sqrt((sigma^2/T) (ln(B/eps))^d (ln ln(B/eps))^{-d}
//                              ln(1/delta)),
// solved to relative 1e-6. Refuses sigma^2 ln(1/delta)/B^2 > T/100 and any
// fixed point at or above B/2, and demands the class at the returned eps be
// constructible from the given spectrum.
double eps_schedule(int T, double sigma, double B, double delta, int d,
                    const EigenSpectrum& spectrum, const KernelParams& kp);

void to_json(nlohmann::json& out, const CertificateReport& report);

}  // namespace hsgp
