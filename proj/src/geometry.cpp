#include "nldiff/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nldiff/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include "nldiff/kernels.hpp"

namespace nldiff {

GraphFn graph_affine(int dl, Vec slope, double intercept) {
  GraphFn g;
  g.dim_lateral = dl;
  g.f = [=](const Vec& x) { return dot(slope, x, dl) + intercept; };
  g.grad = [=](const Vec&) { return slope; };
  g.hess = [](const Vec&) { return std::array<double, 4>{0, 0, 0, 0}; };
  return g;
}

GraphFn graph_parabola(int dl, double rho) {
  if (!(rho > 0.0)) throw validation_error("graph_parabola: rho > 0 required");
  GraphFn g;
  g.dim_lateral = dl;
  g.f = [=](const Vec& x) { return dot(x, x, dl) / (2.0 * rho); };
  g.grad = [=](const Vec& x) {
    Vec v{0, 0, 0};
    for (int i = 0; i < dl; ++i) v[i] = x[i] / rho;
    return v;
  };
  g.hess = [=](const Vec&) {
    std::array<double, 4> h{0, 0, 0, 0};
    h[0] = 1.0 / rho;
    if (dl == 2) h[3] = 1.0 / rho;
    return h;
  };
  return g;
}

GraphFn graph_sine(int dl, double amplitude, double wavenumber,
                   double intercept) {
  GraphFn g;
  g.dim_lateral = dl;
  g.f = [=](const Vec& x) {
    return amplitude * std::sin(wavenumber * x[0]) + intercept;
  };
  g.grad = [=](const Vec& x) {
    Vec v{0, 0, 0};
    v[0] = amplitude * wavenumber * std::cos(wavenumber * x[0]);
    return v;
  };
  g.hess = [=](const Vec& x) {
    std::array<double, 4> h{0, 0, 0, 0};
    h[0] = -amplitude * wavenumber * wavenumber * std::sin(wavenumber * x[0]);
    return h;
  };
  return g;
}

DomainGeometry DomainGeometry::half_space(int N, Vec n, double offset) {
  DomainGeometry d;
  d.kind = DomainKind::half_space;
  d.dimension = N;
  const double nn = norm(n, N);
  if (!(nn > 0)) throw validation_error("half_space: zero normal");
  for (int i = 0; i < N; ++i) n[i] /= nn;
  d.normal = n;
  d.offset = offset / nn;
  return d;
}

DomainGeometry DomainGeometry::ball_interior(int N, Vec center, double radius) {
  DomainGeometry d;
  d.kind = DomainKind::ball_interior;
  d.dimension = N;
  d.center = center;
  d.radius = radius;
  return d;
}

DomainGeometry DomainGeometry::ball_exterior(int N, Vec center, double radius) {
  DomainGeometry d;
  d.kind = DomainKind::ball_exterior;
  d.dimension = N;
  d.center = center;
  d.radius = radius;
  return d;
}

DomainGeometry DomainGeometry::graph_domain(int N, GraphFn g) {
  DomainGeometry d;
  d.kind = DomainKind::graph_domain;
  d.dimension = N;
  if (g.dim_lateral != N - 1)
    throw validation_error("graph_domain: lateral dimension mismatch");
  d.graph = std::move(g);
  return d;
}

namespace {

// Squared distance from x to the graph point above y'.
double graph_dist2(const GraphFn& g, const Vec& x, int N, const Vec& yp) {
  double s = 0.0;
  for (int i = 0; i + 1 < N; ++i) s += (x[i] - yp[i]) * (x[i] - yp[i]);
  const double dz = x[N - 1] - g.f(yp);
  return s + dz * dz;
}

// Damped Newton on the foot-point equations
//   (y' - x') + (f(y') - x_N) grad f(y') = 0.
// Returns true on convergence; yp holds the foot point.
bool newton_foot(const GraphFn& g, const Vec& x, int N, Vec& yp) {
  const int dl = N - 1;
  for (int it = 0; it < 60; ++it) {
    const double fv = g.f(yp);
    const Vec gr = g.grad(yp);
    const auto H = g.hess(yp);
    const double dz = fv - x[N - 1];
    Vec res{0, 0, 0};
    double rn = 0.0;
    for (int i = 0; i < dl; ++i) {
      res[i] = (yp[i] - x[i]) + dz * gr[i];
      rn = std::max(rn, std::abs(res[i]));
    }
    const double scale = 1.0 + std::abs(dz);
    if (rn <= 1e-13 * scale) return true;
    // J = I + grad grad^T + dz * Hess
    double J[4] = {1.0 + gr[0] * gr[0] + dz * H[0], 0, 0, 0};
    Vec step{0, 0, 0};
    if (dl == 1) {
      if (std::abs(J[0]) < 1e-30) return false;
      step[0] = res[0] / J[0];
    } else {
      J[1] = gr[0] * gr[1] + dz * H[1];
      J[2] = gr[1] * gr[0] + dz * H[2];
      J[3] = 1.0 + gr[1] * gr[1] + dz * H[3];
      const double det = J[0] * J[3] - J[1] * J[2];
      if (std::abs(det) < 1e-30) return false;
      step[0] = (J[3] * res[0] - J[1] * res[1]) / det;
      step[1] = (-J[2] * res[0] + J[0] * res[1]) / det;
    }
    double lam = 1.0;
    for (int back = 0; back < 30; ++back) {
      Vec trial = yp;
      for (int i = 0; i < dl; ++i) trial[i] = yp[i] - lam * step[i];
      const double fv2 = g.f(trial);
      const Vec gr2 = g.grad(trial);
      const double dz2 = fv2 - x[N - 1];
      double rn2 = 0.0;
      for (int i = 0; i < dl; ++i)
        rn2 = std::max(rn2, std::abs((trial[i] - x[i]) + dz2 * gr2[i]));
      if (rn2 < rn || lam < 1e-6) {
        yp = trial;
        break;
      }
      lam *= 0.5;
    }
  }
  return false;
}

// Coarse scan over an auto-expanded lateral window, then polish.
double graph_distance(const GraphFn& g, const Vec& x, int N) {
  const int dl = N - 1;
  Vec best{x[0], x[1], 0};
  best[dl] = 0;  // unused lateral slots stay zero
  double best_d2 = graph_dist2(g, x, N, best);
  double W = std::max(2.0 * std::sqrt(best_d2), 0.25);
  for (int expand = 0; expand < 14; ++expand) {
    Vec cand = best;
    double cand_d2 = best_d2;
    bool on_edge = false;
    if (dl == 1) {
      const int m = 257;
      for (int i = 0; i < m; ++i) {
        Vec yp{x[0] - W + 2.0 * W * i / (m - 1), 0, 0};
        const double d2 = graph_dist2(g, x, N, yp);
        if (d2 < cand_d2) {
          cand_d2 = d2;
          cand = yp;
          on_edge = (i == 0 || i == m - 1);
        }
      }
    } else {
      const int m = 65;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          Vec yp{x[0] - W + 2.0 * W * i / (m - 1),
                 x[1] - W + 2.0 * W * j / (m - 1), 0};
          const double d2 = graph_dist2(g, x, N, yp);
          if (d2 < cand_d2) {
            cand_d2 = d2;
            cand = yp;
            on_edge = (i == 0 || i == m - 1 || j == 0 || j == m - 1);
          }
        }
    }
    const bool improved = cand_d2 < best_d2 * (1.0 - 1e-12);
    best = cand;
    best_d2 = cand_d2;
    if (!improved && !on_edge) break;
    W *= 2.0;
  }
  Vec foot = best;
  if (newton_foot(g, x, N, foot)) {
    const double d2 = graph_dist2(g, x, N, foot);
    if (d2 <= best_d2 * (1.0 + 1e-9)) return std::sqrt(d2);
  }
  // golden-section fallback along each axis around the best sample
  const double gr = 0.6180339887498949;
  for (int axis = 0; axis < dl; ++axis) {
    double a = best[axis] - W / 256, b = best[axis] + W / 256;
    for (int it = 0; it < 80; ++it) {
      const double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
      Vec y1 = best, y2 = best;
      y1[axis] = c1;
      y2[axis] = c2;
      if (graph_dist2(g, x, N, y1) < graph_dist2(g, x, N, y2))
        b = c2;
      else
        a = c1;
    }
    best[axis] = 0.5 * (a + b);
  }
  return std::sqrt(graph_dist2(g, x, N, best));
}

// Fast path used by the Monte-Carlo sampler: Newton from the lateral
// coordinates of x (valid near the contact region), global fallback.
double graph_distance_near(const GraphFn& g, const Vec& x, int N) {
  Vec foot{x[0], x[1], 0};
  if (newton_foot(g, x, N, foot))
    return std::sqrt(graph_dist2(g, x, N, foot));
  return graph_distance(g, x, N);
}

}  // namespace

double signed_distance(const DomainGeometry& dom, const Vec& x) {
  switch (dom.kind) {
    case DomainKind::half_space:
      return dot(x, dom.normal, dom.dimension) - dom.offset;
    case DomainKind::ball_interior: {
      Vec r = x;
      for (int i = 0; i < dom.dimension; ++i) r[i] -= dom.center[i];
      return dom.radius - norm(r, dom.dimension);
    }
    case DomainKind::ball_exterior: {
      Vec r = x;
      for (int i = 0; i < dom.dimension; ++i) r[i] -= dom.center[i];
      return norm(r, dom.dimension) - dom.radius;
    }
    case DomainKind::graph_domain: {
      const double d = graph_distance(dom.graph, x, dom.dimension);
      const double above = x[dom.dimension - 1] - dom.graph.f(x);
      return above > 0.0 ? d : -d;
    }
  }
  throw validation_error("signed_distance: unknown domain kind");
}

Vec inward_normal(const DomainGeometry& dom, const Vec& y) {
  const int N = dom.dimension;
  Vec n{0, 0, 0};
  switch (dom.kind) {
    case DomainKind::half_space:
      return dom.normal;
    case DomainKind::ball_interior: {
      for (int i = 0; i < N; ++i) n[i] = dom.center[i] - y[i];
      break;
    }
    case DomainKind::ball_exterior: {
      for (int i = 0; i < N; ++i) n[i] = y[i] - dom.center[i];
      break;
    }
    case DomainKind::graph_domain: {
      const Vec g = dom.graph.grad(y);
      for (int i = 0; i + 1 < N; ++i) n[i] = -g[i];
      n[N - 1] = 1.0;
      break;
    }
  }
  const double nn = norm(n, N);
  for (int i = 0; i < N; ++i) n[i] /= nn;
  return n;
}

std::vector<double> principal_curvatures(const DomainGeometry& dom,
                                         const Vec& y) {
  const int N = dom.dimension;
  if (std::abs(signed_distance(dom, y)) > 1e-9)
    throw validation_error("principal_curvatures: point not on the boundary");
  switch (dom.kind) {
    case DomainKind::half_space:
      return std::vector<double>(N - 1, 0.0);
    case DomainKind::ball_interior:
      return std::vector<double>(N - 1, 1.0 / dom.radius);
    case DomainKind::ball_exterior:
      return std::vector<double>(N - 1, -1.0 / dom.radius);
    case DomainKind::graph_domain: {
      const Vec g = dom.graph.grad(y);
      const auto H = dom.graph.hess(y);
      if (N == 2) {
        const double w = std::sqrt(1.0 + g[0] * g[0]);
        return {H[0] / (w * w * w)};
      }
      // shape operator (I + grad grad^T)^{-1} Hess / sqrt(1+|grad|^2)
      const double w2 = 1.0 + g[0] * g[0] + g[1] * g[1];
      const double w = std::sqrt(w2);
      const double G[4] = {1.0 + g[0] * g[0], g[0] * g[1], g[0] * g[1],
                           1.0 + g[1] * g[1]};
      const double det_g = G[0] * G[3] - G[1] * G[2];
      const double Gi[4] = {G[3] / det_g, -G[1] / det_g, -G[2] / det_g,
                            G[0] / det_g};
      const double S[4] = {
          (Gi[0] * H[0] + Gi[1] * H[2]) / w, (Gi[0] * H[1] + Gi[1] * H[3]) / w,
          (Gi[2] * H[0] + Gi[3] * H[2]) / w, (Gi[2] * H[1] + Gi[3] * H[3]) / w};
      const double tr = S[0] + S[3];
      const double dt = S[0] * S[3] - S[1] * S[2];
      const double disc = std::sqrt(std::max(tr * tr - 4.0 * dt, 0.0));
      return {0.5 * (tr - disc), 0.5 * (tr + disc)};
    }
  }
  throw validation_error("principal_curvatures: unknown domain kind");
}

TouchingBall make_touching_ball(const DomainGeometry& dom, const Vec& contact,
                                double R) {
  if (!(R > 0.0)) throw validation_error("touching ball: R > 0 required");
  if (std::abs(signed_distance(dom, contact)) > 1e-9)
    throw validation_error("touching ball: contact point not on the boundary");
  const int N = dom.dimension;
  const Vec nu = inward_normal(dom, contact);
  TouchingBall b;
  b.radius = R;
  b.contact_point = contact;
  for (int i = 0; i < N; ++i) b.center[i] = contact[i] + R * nu[i];
  const double dc = signed_distance(dom, b.center);
  if (std::abs(dc - R) > 1e-9)
    throw validation_error("touching ball: center is not at distance R");
  b.curvatures = principal_curvatures(dom, contact);
  double prod = 1.0;
  for (double k : b.curvatures) {
    if (k > 1.0 / R + 1e-9)
      throw validation_error("touching ball: curvature exceeds 1/R");
    prod *= (1.0 / R - k);
  }
  if (prod < -1e-12)
    throw validation_error("touching ball: curvature sign convention broken");
  return b;
}

// ---------------------------------------------------------------------------
// level-set measure
// ---------------------------------------------------------------------------

namespace {

double sphere_cap_measure(int N, double r1, double D, double R) {
  // H^{N-1} of the part of the sphere of radius r1 (around the domain
  // center) lying inside the ball of radius R whose center is at distance
  // D from the domain center.
  double ct = 1.0;
  if (D > 0.0 && r1 > 0.0) ct = (D * D + r1 * r1 - R * R) / (2.0 * D * r1);
  if (ct >= 1.0) return 0.0;
  if (ct <= -1.0)
    return (N == 2) ? 2.0 * M_PI * r1 : 4.0 * M_PI * r1 * r1;
  const double theta = std::acos(ct);
  if (N == 2) return 2.0 * r1 * theta;
  return 2.0 * M_PI * r1 * r1 * (1.0 - ct);
}

struct CellSegment {
  double x1, y1, x2, y2;
};

// Marching squares on a sampled window; linear interpolation along edges,
// ambiguous saddles resolved by the cell-center average.
std::vector<CellSegment> marching_squares(
    const std::function<double(double, double)>& field, double x0, double y0,
    double wx, double wy, int n, double iso) {
  std::vector<double> vals((n + 1) * (n + 1));
  const double dx = wx / n, dy = wy / n;
  kernels::parallel_for(0, n + 1, [&](int j) {
    for (int i = 0; i <= n; ++i)
      vals[std::size_t(j) * (n + 1) + i] =
          field(x0 + i * dx, y0 + j * dy) - iso;
  });
  std::vector<CellSegment> segs;
  auto interp = [&](double xa, double ya, double fa, double xb, double yb,
                    double fb, double& px, double& py) {
    const double t = fa / (fa - fb);
    px = xa + t * (xb - xa);
    py = ya + t * (yb - ya);
  };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double f00 = vals[std::size_t(j) * (n + 1) + i];
      const double f10 = vals[std::size_t(j) * (n + 1) + i + 1];
      const double f11 = vals[std::size_t(j + 1) * (n + 1) + i + 1];
      const double f01 = vals[std::size_t(j + 1) * (n + 1) + i];
      const bool b00 = f00 >= 0, b10 = f10 >= 0, b11 = f11 >= 0, b01 = f01 >= 0;
      if (b00 == b10 && b10 == b11 && b11 == b01) continue;
      const double xa = x0 + i * dx, ya = y0 + j * dy;
      const double xb = xa + dx, yb = ya + dy;
      // crossing points on the four edges (bottom, right, top, left)
      double ex[4], ey[4];
      bool has[4] = {false, false, false, false};
      if (b00 != b10) { interp(xa, ya, f00, xb, ya, f10, ex[0], ey[0]); has[0] = true; }
      if (b10 != b11) { interp(xb, ya, f10, xb, yb, f11, ex[1], ey[1]); has[1] = true; }
      if (b01 != b11) { interp(xa, yb, f01, xb, yb, f11, ex[2], ey[2]); has[2] = true; }
      if (b00 != b01) { interp(xa, ya, f00, xa, yb, f01, ex[3], ey[3]); has[3] = true; }
      int idx[4], cnt = 0;
      for (int e = 0; e < 4; ++e)
        if (has[e]) idx[cnt++] = e;
      if (cnt == 2) {
        segs.push_back({ex[idx[0]], ey[idx[0]], ex[idx[1]], ey[idx[1]]});
      } else if (cnt == 4) {
        const double fc = 0.25 * (f00 + f10 + f11 + f01);
        if ((fc >= 0) == b00) {
          segs.push_back({ex[0], ey[0], ex[1], ey[1]});
          segs.push_back({ex[2], ey[2], ex[3], ey[3]});
        } else {
          segs.push_back({ex[0], ey[0], ex[3], ey[3]});
          segs.push_back({ex[1], ey[1], ex[2], ey[2]});
        }
      }
    }
  }
  return segs;
}

// Length of the part of a segment inside the disk |x - c| <= R.
double clipped_length(const CellSegment& s, double cx, double cy, double R) {
  const double dx = s.x2 - s.x1, dy = s.y2 - s.y1;
  const double px = s.x1 - cx, py = s.y1 - cy;
  const double a = dx * dx + dy * dy;
  if (a == 0.0) return 0.0;
  const double b = 2.0 * (px * dx + py * dy);
  const double c = px * px + py * py - R * R;
  const double disc = b * b - 4.0 * a * c;
  if (disc <= 0.0) return 0.0;  // line misses the disk
  const double sq = std::sqrt(disc);
  const double t0 = std::max((-b - sq) / (2.0 * a), 0.0);
  const double t1 = std::min((-b + sq) / (2.0 * a), 1.0);
  if (t1 <= t0) return 0.0;
  return (t1 - t0) * std::sqrt(a);
}

struct ContourWindow {
  double x0, y0, wx, wy;
};

ContourWindow contour_window(const DomainGeometry& dom, double s,
                             const TouchingBall& ball) {
  const double R = ball.radius;
  double gap = std::numeric_limits<double>::infinity();
  for (double k : ball.curvatures) gap = std::min(gap, 1.0 / R - k);
  const double lat1 = (gap > 1e-9) ? std::sqrt(2.2 * s / gap) : 0.0;
  const double lat2 = std::pow(8.0 * R * R * R * s, 0.25);
  const double w = std::min(1.05 * R, 1.6 * std::max({lat1, lat2, 10.0 * s}));
  const double cx = ball.contact_point[0];
  // vertical range: sample the graph over the lateral window
  double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
  for (int i = 0; i <= 256; ++i) {
    const double fx = dom.graph.f({cx - w + 2.0 * w * i / 256.0, 0, 0});
    fmin = std::min(fmin, fx);
    fmax = std::max(fmax, fx);
  }
  const double pad = 0.05 * w + 2.0 * s;
  return {cx - w, fmin - pad, 2.0 * w, fmax - fmin + 2.0 * pad + 2.0 * s};
}

MeasureEstimate contour_measure(const DomainGeometry& dom, double s,
                                const TouchingBall& ball) {
  const ContourWindow cw = contour_window(dom, s, ball);
  const int n = 2048;
  auto field = [&](double x, double y) {
    return signed_distance(dom, {x, y, 0});
  };
  const auto segs =
      marching_squares(field, cw.x0, cw.y0, cw.wx, cw.wy, n, s);
  double len = 0.0;
  for (const auto& sg : segs)
    len += clipped_length(sg, ball.center[0], ball.center[1], ball.radius);
  return {len, 0.0, "contour"};
}

MeasureEstimate mc_shell_measure(const DomainGeometry& dom, double s,
                                 const TouchingBall& ball, std::uint64_t seed,
                                 const MCOptions& mc) {
  const double R = ball.radius;
  const double delta = s / 100.0;
  double gap = std::numeric_limits<double>::infinity();
  for (double k : ball.curvatures) gap = std::min(gap, 1.0 / R - k);
  const GraphFn& g = dom.graph;
  const double cx = ball.contact_point[0], cy = ball.contact_point[1];

  double w = 1.5 * std::max(std::sqrt(2.0 * (s + delta) / std::max(gap, 1e-12)),
                            std::pow(8.0 * R * R * R * (s + delta), 0.25));
  for (int widen = 0; widen < 4; ++widen) {
    // max slope over the lateral box, sampled
    double slope2 = 0.0;
    for (int i = 0; i <= 32; ++i)
      for (int j = 0; j <= 32; ++j) {
        const Vec xp{cx - w + 2.0 * w * i / 32.0, cy - w + 2.0 * w * j / 32.0,
                     0};
        const Vec gr = g.grad(xp);
        slope2 = std::max(slope2, gr[0] * gr[0] + gr[1] * gr[1]);
      }
    const double sec = std::sqrt(1.0 + slope2);
    const double a_lo = (s - delta) * 0.98;
    const double a_hi = (s + delta) * sec * 1.02;
    const double vol = (2.0 * w) * (2.0 * w) * (a_hi - a_lo);

    std::uint64_t n_total = 0, hits = 0;
    double max_lat = 0.0;
    bool too_small = false;
    while (true) {
      const std::uint64_t n0 = n_total;
      const std::uint64_t n1 =
          std::min<std::uint64_t>(n_total + mc.batch, mc.max_samples);
      double batch_maxlat = 0.0;
      const std::uint64_t got = kernels::count_hits_maxstat(
          n0, n1,
          [&](std::uint64_t i, double& stat) -> bool {
            const double u1 = counter_uniform(seed, i, 0);
            const double u2 = counter_uniform(seed, i, 1);
            const double u3 = counter_uniform(seed, i, 2);
            Vec x{cx - w + 2.0 * w * u1, cy - w + 2.0 * w * u2, 0};
            const double a = a_lo + (a_hi - a_lo) * u3;
            x[2] = g.f(x) + a;
            Vec r = x;
            for (int q = 0; q < 3; ++q) r[q] -= ball.center[q];
            if (!(dot(r, r, 3) < R * R)) return false;
            const double d = graph_distance_near(g, x, 3);
            if (!(d > s - delta && d < s + delta)) return false;
            const double lx = x[0] - cx, ly = x[1] - cy;
            stat = std::max(stat, std::sqrt(lx * lx + ly * ly));
            return true;
          },
          batch_maxlat);
      hits += got;
      n_total = n1;
      max_lat = std::max(max_lat, batch_maxlat);
      if (max_lat > 0.9 * w) {
        too_small = true;  // window clipped the shell; widen and restart
        break;
      }
      if (hits >= 100) {
        const double p = double(hits) / double(n_total);
        const double rel_se = std::sqrt((1.0 - p) / (double(hits)));
        if (rel_se <= mc.target_rel_stderr) {
          const double est = vol * p / (2.0 * delta);
          return {est, est * rel_se, "mc-shell"};
        }
      }
      if (n_total >= mc.max_samples) {
        const double p = double(hits) / double(n_total);
        const double est = vol * p / (2.0 * delta);
        const double se =
            hits > 0 ? est * std::sqrt((1.0 - p) / double(hits)) : est;
        throw numerical_error(
            "mc-shell: variance target not reached at sample cap", est, se);
      }
    }
    if (too_small) w *= 1.5;
  }
  throw numerical_error("mc-shell: sampling window kept clipping the shell");
}

}  // namespace

MeasureEstimate level_set_measure(const DomainGeometry& dom, double s,
                                  const TouchingBall& ball, std::uint64_t seed,
                                  const MCOptions& mc) {
  if (!(s > 0.0 && s < ball.radius))
    throw validation_error("level_set_measure: need 0 < s < R");
  const int N = dom.dimension;
  const double R = ball.radius;
  switch (dom.kind) {
    case DomainKind::half_space: {
      const double r2 = 2.0 * R * s - s * s;
      return {ball_volume(N - 1) * std::pow(r2, 0.5 * (N - 1)), 0.0,
              "closed-form"};
    }
    case DomainKind::ball_exterior: {
      const double D = dom.radius + R;  // centers distance
      return {sphere_cap_measure(N, dom.radius + s, D, R), 0.0, "closed-form"};
    }
    case DomainKind::ball_interior: {
      const double D = dom.radius - R;
      return {sphere_cap_measure(N, dom.radius - s, D, R), 0.0, "closed-form"};
    }
    case DomainKind::graph_domain: {
      if (N == 2) return contour_measure(dom, s, ball);
      if (N == 3) return mc_shell_measure(dom, s, ball, seed, mc);
      throw validation_error("level_set_measure: graph domains support N<=3");
    }
  }
  throw validation_error("level_set_measure: unknown domain kind");
}

// ---------------------------------------------------------------------------
// sup/inf convolution
// ---------------------------------------------------------------------------

namespace {

double convolve_1d(const GraphFn& fn, double R, double x, int sign) {
  auto value = [&](double y) {
    const double dy = y - x;
    const double root = std::sqrt(std::max(R * R - dy * dy, 0.0));
    return fn.f({y, 0, 0}) + sign * root;
  };
  const int m = 4096;
  double best_y = x, best = value(x);
  for (int i = 0; i <= m; ++i) {
    const double y = x - R + 2.0 * R * i / m;
    const double v = value(y);
    if (sign * (v - best) > 0) {
      best = v;
      best_y = y;
    }
  }
  // golden-section polish around the best sample
  const double gr = 0.6180339887498949;
  double a = std::max(best_y - 2.0 * R / m, x - R);
  double b = std::min(best_y + 2.0 * R / m, x + R);
  for (int it = 0; it < 100; ++it) {
    const double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    if (sign * (value(c1) - value(c2)) > 0)
      b = c2;
    else
      a = c1;
  }
  return value(0.5 * (a + b));
}

double convolve_2d(const GraphFn& fn, double R, const Vec& x, int sign) {
  auto value = [&](double y0, double y1) {
    const double d2 = (y0 - x[0]) * (y0 - x[0]) + (y1 - x[1]) * (y1 - x[1]);
    if (d2 > R * R) return sign > 0 ? -1e300 : 1e300;
    return fn.f({y0, y1, 0}) + sign * std::sqrt(R * R - d2);
  };
  double cx = x[0], cy = x[1], w = R;
  double best = value(cx, cy);
  double bx = cx, by = cy;
  for (int level = 0; level < 6; ++level) {
    const int m = 64;
    for (int i = 0; i <= m; ++i)
      for (int j = 0; j <= m; ++j) {
        const double y0 = cx - w + 2.0 * w * i / m;
        const double y1 = cy - w + 2.0 * w * j / m;
        const double v = value(y0, y1);
        if (sign * (v - best) > 0) {
          best = v;
          bx = y0;
          by = y1;
        }
      }
    cx = bx;
    cy = by;
    w = 4.0 * w / m;
  }
  return best;
}

}  // namespace

double sup_convolution(const GraphFn& f, double R, const Vec& xprime) {
  if (!(R > 0.0)) throw validation_error("sup_convolution: R > 0 required");
  return f.dim_lateral == 1 ? convolve_1d(f, R, xprime[0], +1)
                            : convolve_2d(f, R, xprime, +1);
}

double inf_convolution(const GraphFn& g, double R, const Vec& xprime) {
  if (!(R > 0.0)) throw validation_error("inf_convolution: R > 0 required");
  return g.dim_lateral == 1 ? convolve_1d(g, R, xprime[0], -1)
                            : convolve_2d(g, R, xprime, -1);
}

std::vector<std::array<double, 4>> contour_segments(const DomainGeometry& dom,
                                                    double s,
                                                    const TouchingBall& ball) {
  if (dom.kind != DomainKind::graph_domain || dom.dimension != 2)
    throw validation_error("contour_segments: 2D graph domains only");
  const ContourWindow cw = contour_window(dom, s, ball);
  auto field = [&](double x, double y) {
    return signed_distance(dom, {x, y, 0});
  };
  const auto segs = marching_squares(field, cw.x0, cw.y0, cw.wx, cw.wy, 2048, s);
  std::vector<std::array<double, 4>> out;
  out.reserve(segs.size());
  for (const auto& sg : segs) out.push_back({sg.x1, sg.y1, sg.x2, sg.y2});
  return out;
}

}  // namespace nldiff
