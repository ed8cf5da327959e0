#include "nldiff/kernels.hpp"

namespace nldiff::kernels {

namespace {
int g_threads = 1;
}

void set_threads(int t) {
  g_threads = t < 1 ? 1 : t;
#ifdef _OPENMP
  if (g_threads > 1) omp_set_num_threads(g_threads);
#endif
}

int threads() { return g_threads; }

bool parallel_enabled() { return g_threads > 1; }

}  // namespace nldiff::kernels
