#include "meanfield/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mf {

namespace {
int g_default_threads = -1;
}

void set_thread_count(int threads) {
#ifdef _OPENMP
  if (g_default_threads < 0) g_default_threads = omp_get_max_threads();
  omp_set_num_threads(threads > 0 ? threads : g_default_threads);
#else
  (void)threads;
#endif
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

int max_thread_count() {
#ifdef _OPENMP
  return omp_get_num_procs();
#else
  return 1;
#endif
}

}  // namespace mf
