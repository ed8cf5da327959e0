// Times the OpenMP kernels against their serial reference implementations
// and verifies that both produce bitwise-identical results.

#include <cinttypes>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>

#include "nldiff/kernels.hpp"
#include "nldiff/rng.hpp"

using namespace nldiff;

namespace {

double now() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <class F>
double time_best(F&& f, int reps = 5) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now();
    f();
    best = std::min(best, now() - t0);
  }
  return best;
}

void fill_random(std::vector<double>& v, std::uint64_t seed) {
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = counter_uniform(seed, i, 0) - 0.5;
}

}  // namespace

int main() {
  const int nx = 1024, ny = 1024;
  const std::size_t n = std::size_t(nx) * ny;
  std::vector<double> q(n), out_s(n), out_p(n);
  std::vector<std::uint8_t> mask(n, kernels::kInterior);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1)
        mask[std::size_t(j) * nx + i] = 1;
  fill_random(q, 7);

  kernels::StencilParams sp;
  sp.dim = 2;
  sp.nx = nx;
  sp.ny = ny;
  sp.ihx2 = 1.0;
  sp.ihy2 = 1.0;
  sp.mask = mask.data();

  int max_threads = 1;
#ifdef _OPENMP
  max_threads = omp_get_max_threads();
#endif
  std::printf("kernel benchmark: grid %dx%d, dot length %zu, %d threads\n\n",
              nx, ny, n, max_threads);
  std::printf("%-22s %12s %12s %8s %8s\n", "kernel", "serial[ms]", "omp[ms]",
              "speedup", "bitwise");

  kernels::set_threads(max_threads);

  {
    const double ts =
        time_best([&] { kernels::stencil_lap_serial(sp, q.data(), out_s.data()); });
    const double tp = time_best(
        [&] { kernels::stencil_lap_parallel(sp, q.data(), out_p.data()); });
    bool same = out_s == out_p;
    std::printf("%-22s %12.3f %12.3f %8.2f %8s\n", "stencil_lap", ts * 1e3,
                tp * 1e3, ts / tp, same ? "yes" : "NO");
  }
  {
    volatile double sink = 0;
    double ds = 0, dp = 0;
    const double ts =
        time_best([&] { ds = kernels::dot_chunked_serial(q.data(), q.data(), n); });
    const double tp = time_best(
        [&] { dp = kernels::dot_chunked_parallel(q.data(), q.data(), n); });
    sink = ds + dp;
    (void)sink;
    std::printf("%-22s %12.3f %12.3f %8.2f %8s\n", "dot_chunked", ts * 1e3,
                tp * 1e3, ts / tp, ds == dp ? "yes" : "NO");
  }
  {
    // Monte-Carlo counting: hits inside the unit disk
    const std::uint64_t ns = 1ull << 22;
    auto pred = [](std::uint64_t i, double& stat) {
      const double x = counter_uniform(42, i, 0) * 2.0 - 1.0;
      const double y = counter_uniform(42, i, 1) * 2.0 - 1.0;
      const double r2 = x * x + y * y;
      if (r2 < 1.0) {
        stat = std::max(stat, r2);
        return true;
      }
      return false;
    };
    std::uint64_t hs = 0, hp = 0;
    double ss = 0, sps = 0;
    const double ts = time_best([&] {
      ss = 0;
      hs = kernels::count_hits_maxstat_serial(0, ns, pred, ss);
    });
    const double tp = time_best([&] {
      sps = 0;
      hp = kernels::count_hits_maxstat_parallel(0, ns, pred, sps);
    });
    const bool same = hs == hp && ss == sps;
    std::printf("%-22s %12.3f %12.3f %8.2f %8s  (pi ~ %.6f)\n",
                "mc_count(4M)", ts * 1e3, tp * 1e3, ts / tp,
                same ? "yes" : "NO", 4.0 * double(hs) / double(ns));
  }
  return 0;
}
