#pragma once
// Data-parallel kernels for the solver hot paths, each in two variants:
// an OpenMP-parallel implementation and a serial reference kept for
// testing. Reductions are chunked with a fixed accumulation order, so the
// parallel results are bitwise identical to the serial reference for any
// thread count. Dispatching wrappers pick a variant from the configured
// thread budget.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nldiff::kernels {

void set_threads(int t);  // <= 1 selects the serial variants
int threads();
bool parallel_enabled();

inline constexpr std::size_t kChunk = 4096;
inline constexpr std::uint8_t kInterior = 0;

// ---- generic loops --------------------------------------------------------

template <class F>
void for_serial(int lo, int hi, F&& f) {
  for (int i = lo; i < hi; ++i) f(i);
}

template <class F>
void for_parallel(int lo, int hi, F&& f) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (int i = lo; i < hi; ++i) f(i);
#else
  for_serial(lo, hi, f);
#endif
}

template <class F>
void parallel_for(int lo, int hi, F&& f) {
  if (parallel_enabled())
    for_parallel(lo, hi, f);
  else
    for_serial(lo, hi, f);
}

// ---- deterministic reductions ---------------------------------------------

inline double dot_chunked_serial(const double* a, const double* b,
                                 std::size_t n) {
  const std::size_t nb = (n + kChunk - 1) / kChunk;
  double total = 0.0;
  for (std::size_t c = 0; c < nb; ++c) {
    const std::size_t e = std::min(n, (c + 1) * kChunk);
    double s = 0.0;
    for (std::size_t i = c * kChunk; i < e; ++i) s += a[i] * b[i];
    total += s;
  }
  return total;
}

inline double dot_chunked_parallel(const double* a, const double* b,
                                   std::size_t n) {
  const std::size_t nb = (n + kChunk - 1) / kChunk;
  std::vector<double> part(nb, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(nb); ++c) {
    const std::size_t e = std::min(n, std::size_t(c + 1) * kChunk);
    double s = 0.0;
    for (std::size_t i = std::size_t(c) * kChunk; i < e; ++i) s += a[i] * b[i];
    part[std::size_t(c)] = s;
  }
  double total = 0.0;
  for (std::size_t c = 0; c < nb; ++c) total += part[c];  // fixed order
  return total;
}

inline double dot_chunked(const double* a, const double* b, std::size_t n) {
  return parallel_enabled() ? dot_chunked_parallel(a, b, n)
                            : dot_chunked_serial(a, b, n);
}

inline double max_abs_serial(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i]));
  return m;
}

inline double max_abs_parallel(const double* a, std::size_t n) {
  double m = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(max : m)
#endif
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(n); ++i)
    m = std::max(m, std::abs(a[i]));
  return m;
}

inline double max_abs(const double* a, std::size_t n) {
  return parallel_enabled() ? max_abs_parallel(a, n) : max_abs_serial(a, n);
}

// ---- vector ops ------------------------------------------------------------

inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  parallel_for(0, int(n), [=](int i) { y[i] += alpha * x[i]; });
}

// p = r + beta p
inline void xpay(const double* r, double beta, double* p, std::size_t n) {
  parallel_for(0, int(n), [=](int i) { p[i] = r[i] + beta * p[i]; });
}

// ---- masked stencils --------------------------------------------------------

struct StencilParams {
  int dim = 2;
  int nx = 0, ny = 1;
  double ihx2 = 0.0, ihy2 = 0.0;
  const std::uint8_t* mask = nullptr;  // kInterior marks solved nodes
};

// out = 5-point Laplacian of q at interior nodes, 0 elsewhere.
inline void stencil_lap_serial(const StencilParams& sp, const double* q,
                               double* out) {
  const int nx = sp.nx, ny = sp.ny;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = std::size_t(j) * nx + i;
      if (sp.mask[k] != kInterior) {
        out[k] = 0.0;
        continue;
      }
      double lap = (q[k - 1] - 2.0 * q[k] + q[k + 1]) * sp.ihx2;
      if (sp.dim == 2)
        lap += (q[k - nx] - 2.0 * q[k] + q[k + nx]) * sp.ihy2;
      out[k] = lap;
    }
}

inline void stencil_lap_parallel(const StencilParams& sp, const double* q,
                                 double* out) {
  const int nx = sp.nx;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int j = 0; j < sp.ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = std::size_t(j) * nx + i;
      if (sp.mask[k] != kInterior) {
        out[k] = 0.0;
        continue;
      }
      double lap = (q[k - 1] - 2.0 * q[k] + q[k + 1]) * sp.ihx2;
      if (sp.dim == 2)
        lap += (q[k - nx] - 2.0 * q[k] + q[k + nx]) * sp.ihy2;
      out[k] = lap;
    }
}

inline void stencil_lap(const StencilParams& sp, const double* q, double* out) {
  if (parallel_enabled())
    stencil_lap_parallel(sp, q, out);
  else
    stencil_lap_serial(sp, q, out);
}

// ---- Monte-Carlo counting ----------------------------------------------------

// Counts pred(i, stat) over i in [n0, n1); integer hits plus a max
// statistic, both order-independent, so any parallel split reproduces the
// serial reference exactly.
template <class Pred>
std::uint64_t count_hits_maxstat_serial(std::uint64_t n0, std::uint64_t n1,
                                        Pred&& pred, double& max_stat) {
  std::uint64_t hits = 0;
  double stat = max_stat;
  for (std::uint64_t i = n0; i < n1; ++i)
    if (pred(i, stat)) ++hits;
  max_stat = stat;
  return hits;
}

template <class Pred>
std::uint64_t count_hits_maxstat_parallel(std::uint64_t n0, std::uint64_t n1,
                                          Pred&& pred, double& max_stat) {
  std::uint64_t hits = 0;
  double stat = max_stat;
#ifdef _OPENMP
#pragma omp parallel
  {
    std::uint64_t h = 0;
    double s = stat;
#pragma omp for schedule(static) nowait
    for (std::int64_t i = std::int64_t(n0); i < std::int64_t(n1); ++i)
      if (pred(std::uint64_t(i), s)) ++h;
#pragma omp critical
    {
      hits += h;
      stat = std::max(stat, s);
    }
  }
#else
  hits = count_hits_maxstat_serial(n0, n1, pred, stat);
#endif
  max_stat = stat;
  return hits;
}

template <class Pred>
std::uint64_t count_hits_maxstat(std::uint64_t n0, std::uint64_t n1,
                                 Pred&& pred, double& max_stat) {
  return parallel_enabled()
             ? count_hits_maxstat_parallel(n0, n1, pred, max_stat)
             : count_hits_maxstat_serial(n0, n1, pred, max_stat);
}

}  // namespace nldiff::kernels
