// Timing table for the OpenMP kernels against their serial references.
// Usage: bench_kernels [scale]   (scale >= 1 grows every workload)

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "hsgp/bandit.hpp"
#include "hsgp/gp_engine.hpp"
#include "hsgp/hard_instances.hpp"
#include "hsgp/mercer.hpp"
#include "hsgp/parallel.hpp"
#include "hsgp/sphere_geometry.hpp"

using namespace hsgp;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double start = omp_get_wtime();
    fn();
    best = std::min(best, omp_get_wtime() - start);
  }
  return best;
}

void row(const char* name, double serial_s, double parallel_s) {
  std::printf("%-24s %12.4f %12.4f %10.2fx\n", name, serial_s, parallel_s,
              serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  const int scale = argc > 1 ? std::max(1, std::atoi(argv[1])) : 1;
  std::printf("threads: %d, scale: %d\n", max_threads(), scale);
  std::printf("%-24s %12s %12s %10s\n", "kernel", "serial[s]", "parallel[s]", "speedup");

  const auto pool = sample_uniform(2, 2048 * scale, 99);
  const int T = 192 * scale;
  row("greedy_mig",
      time_best_of(2, [&] { greedy_mig_serial(T, pool, 1.0, 0.1); }),
      time_best_of(2, [&] { greedy_mig(T, pool, 1.0, 0.1); }));

  const EigenSpectrum spec = build_spectrum(KernelParams{2, 1.0}, 60);
  const FunctionClass fc = build_class(0.05, 1.0, KernelParams{2, 1.0}, spec, 7);
  const std::size_t samples = 40000u * scale;
  row("region_sup_squares",
      time_best_of(2, [&] { region_sup_squares_serial(fc, 0, samples, 5); }),
      time_best_of(2, [&] { region_sup_squares(fc, 0, samples, 5); }));

  const auto [f, f_tilde] = adversarial_pair(fc, 0, 1);
  row("max_kl_per_region",
      time_best_of(2, [&] { max_kl_per_region_serial(f, f_tilde, fc.partition, 0.1, samples); }),
      time_best_of(2, [&] { max_kl_per_region(f, f_tilde, fc.partition, 0.1, samples); }));

  std::vector<SpherePoint> bandit_pool = fc.partition.centers.centers;
  for (const SpherePoint& p : sample_uniform(2, 128, 31)) bandit_pool.push_back(p);
  const EpisodeParams params{1.0, 0.0};
  const int trials = 4 * scale;
  row("worst_member_regret",
      time_best_of(1, [&] {
        worst_member_regret_serial(Algorithm::gp_ucb, fc, 64, bandit_pool, params, 0.05,
                                   trials, 11);
      }),
      time_best_of(1, [&] {
        worst_member_regret(Algorithm::gp_ucb, fc, 64, bandit_pool, params, 0.05, trials, 11);
      }));
  return 0;
}
