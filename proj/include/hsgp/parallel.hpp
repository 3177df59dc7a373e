#pragma once

#include <omp.h>

#include <cstdlib>

namespace hsgp {

// Number of OpenMP threads to use, honoring the HSGP_THREADS cap.
inline int max_threads() {
  int n = omp_get_max_threads();
  if (const char* s = std::getenv("HSGP_THREADS")) {
    const int cap = std::atoi(s);
    if (cap >= 1 && cap < n) n = cap;
  }
  return n;
}

}  // namespace hsgp
