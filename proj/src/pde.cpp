#include "nldiff/pde.hpp"

#include <algorithm>
#include <cmath>

#include "nldiff/kernels.hpp"

namespace nldiff {

std::shared_ptr<Grid> build_grid(const DomainGeometry& dom, ProblemKind prob,
                                 std::array<double, 2> origin,
                                 std::array<double, 2> extent,
                                 std::array<int, 2> n) {
  auto g = std::make_shared<Grid>();
  g->dimension = dom.dimension;
  if (g->dimension < 1 || g->dimension > 2)
    throw validation_error("build_grid: PDE grids are 1D or 2D");
  g->origin = origin;
  g->extent = extent;
  g->n = n;
  if (g->dimension == 1) g->n[1] = 1;
  if (g->n[0] < 3 || (g->dimension == 2 && g->n[1] < 3))
    throw validation_error("build_grid: too few nodes");
  g->h[0] = extent[0] / (g->n[0] - 1);
  g->h[1] = g->dimension == 2 ? extent[1] / (g->n[1] - 1) : 0.0;

  const std::size_t nn = g->num_nodes();
  g->node_distance.resize(nn);
  g->mask.assign(nn, NodeMask::exterior);
  g->boundary_value.assign(nn, 0.0);

  const int nx = g->n[0], ny = g->n[1];
  kernels::parallel_for(0, ny, [&](int iy) {
    for (int ix = 0; ix < nx; ++ix) {
      const Vec p{g->x(ix), g->dimension == 2 ? g->y(iy) : 0.0, 0.0};
      g->node_distance[g->idx(ix, iy)] = signed_distance(dom, p);
    }
  });

  auto on_frame = [&](int ix, int iy) {
    if (ix == 0 || ix == nx - 1) return true;
    return g->dimension == 2 && (iy == 0 || iy == ny - 1);
  };

  if (prob == ProblemKind::cauchy) {
    // whole-window evolution; frame pinned at the initial indicator data
    for (int iy = 0; iy < ny; ++iy)
      for (int ix = 0; ix < nx; ++ix) {
        const std::size_t k = g->idx(ix, iy);
        const double chi = g->node_distance[k] <= 0.0 ? 1.0 : 0.0;
        if (on_frame(ix, iy)) {
          g->mask[k] = NodeMask::boundary;
          g->boundary_value[k] = chi;
        } else {
          g->mask[k] = NodeMask::interior;
        }
      }
    return g;
  }

  // ibvp: interior = inside the domain, off the frame
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t k = g->idx(ix, iy);
      if (g->node_distance[k] > 0.0 && !on_frame(ix, iy))
        g->mask[k] = NodeMask::interior;
    }
  // boundary = first exterior-side layer (pinned 1), then frame cuts
  // through the domain (pinned 0, far field)
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const std::size_t k = g->idx(ix, iy);
      if (g->mask[k] == NodeMask::interior) continue;
      bool adjacent = false;
      if (ix > 0 && g->mask[g->idx(ix - 1, iy)] == NodeMask::interior)
        adjacent = true;
      if (ix + 1 < nx && g->mask[g->idx(ix + 1, iy)] == NodeMask::interior)
        adjacent = true;
      if (g->dimension == 2) {
        if (iy > 0 && g->mask[g->idx(ix, iy - 1)] == NodeMask::interior)
          adjacent = true;
        if (iy + 1 < ny && g->mask[g->idx(ix, iy + 1)] == NodeMask::interior)
          adjacent = true;
      }
      if (!adjacent) continue;
      g->mask[k] = NodeMask::boundary;
      g->boundary_value[k] = g->node_distance[k] <= 0.0 ? 1.0 : 0.0;
    }
  return g;
}

namespace {

kernels::StencilParams stencil_params(const Grid& g) {
  kernels::StencilParams sp;
  sp.dim = g.dimension;
  sp.nx = g.n[0];
  sp.ny = g.n[1];
  sp.ihx2 = 1.0 / (g.h[0] * g.h[0]);
  sp.ihy2 = g.dimension == 2 ? 1.0 / (g.h[1] * g.h[1]) : 0.0;
  sp.mask = reinterpret_cast<const std::uint8_t*>(g.mask.data());
  return sp;
}

struct Workspace {
  std::vector<double> phiU, lap, r, pvec, Ap, sw, sqrtD, delta, b;
  void resize(std::size_t n) {
    for (auto* v : {&phiU, &lap, &r, &pvec, &Ap, &sw, &sqrtD, &delta, &b})
      v->assign(n, 0.0);
  }
};

// residual F = U - un - dt Lap(phi(U)) on interior nodes
void assemble_residual(const Nonlinearity& nl, const Grid& g,
                       const std::vector<double>& u,
                       const std::vector<double>& un, double dt,
                       Workspace& ws) {
  const std::size_t n = g.num_nodes();
  const auto* mask = g.mask.data();
  kernels::parallel_for(0, int(n), [&](int i) {
    ws.phiU[i] = mask[i] == NodeMask::exterior ? 0.0 : nl.phi(u[i]);
  });
  kernels::stencil_lap(stencil_params(g), ws.phiU.data(), ws.lap.data());
  kernels::parallel_for(0, int(n), [&](int i) {
    ws.b[i] = mask[i] == NodeMask::interior
                  ? u[i] - un[i] - dt * ws.lap[i]
                  : 0.0;
  });
}

// CG on the symmetrized Jacobian M = I - dt S Lap S, S = diag(sqrt(phi'(U)))
int solve_sym_cg(const Nonlinearity& nl, const Grid& g,
                 const std::vector<double>& u, double dt, Workspace& ws,
                 std::vector<double>& w, double rel_tol) {
  const std::size_t n = g.num_nodes();
  const auto* mask = g.mask.data();
  kernels::parallel_for(0, int(n), [&](int i) {
    ws.sqrtD[i] =
        mask[i] == NodeMask::interior ? std::sqrt(nl.dphi(u[i])) : 0.0;
  });

  auto apply_M = [&](const std::vector<double>& x, std::vector<double>& out) {
    kernels::parallel_for(
        0, int(n), [&](int i) { ws.sw[i] = ws.sqrtD[i] * x[i]; });
    kernels::stencil_lap(stencil_params(g), ws.sw.data(), ws.lap.data());
    kernels::parallel_for(0, int(n), [&](int i) {
      out[i] = mask[i] == NodeMask::interior
                   ? x[i] - dt * ws.sqrtD[i] * ws.lap[i]
                   : 0.0;
    });
  };

  // rhs = -S F
  kernels::parallel_for(
      0, int(n), [&](int i) { ws.r[i] = -ws.sqrtD[i] * ws.b[i]; });
  std::fill(w.begin(), w.end(), 0.0);
  const double b2 = kernels::dot_chunked(ws.r.data(), ws.r.data(), n);
  if (b2 == 0.0) return 0;
  const double stop2 = b2 * rel_tol * rel_tol;
  ws.pvec = ws.r;
  double r2 = b2;
  int it = 0;
  for (; it < 20000; ++it) {
    apply_M(ws.pvec, ws.Ap);
    const double pAp = kernels::dot_chunked(ws.pvec.data(), ws.Ap.data(), n);
    if (!(pAp > 0.0)) break;
    const double alpha = r2 / pAp;
    kernels::axpy(alpha, ws.pvec.data(), w.data(), n);
    kernels::axpy(-alpha, ws.Ap.data(), ws.r.data(), n);
    const double r2n = kernels::dot_chunked(ws.r.data(), ws.r.data(), n);
    if (r2n <= stop2) {
      ++it;
      break;
    }
    kernels::xpay(ws.r.data(), r2n / r2, ws.pvec.data(), n);
    r2 = r2n;
  }
  // delta = S^{-1} w on interior nodes
  kernels::parallel_for(0, int(n), [&](int i) {
    w[i] = mask[i] == NodeMask::interior ? w[i] / ws.sqrtD[i] : 0.0;
  });
  return it;
}

}  // namespace

std::vector<double> step(const Nonlinearity& nl, const Grid& grid,
                         const std::vector<double>& un, double dt,
                         StepStats* stats) {
  if (!(dt > 0.0)) throw validation_error("step: dt must be positive");
  const std::size_t n = grid.num_nodes();
  static thread_local Workspace ws;
  ws.resize(n);

  std::vector<double> u = un;  // warm start; boundary values stay pinned
  assemble_residual(nl, grid, u, un, dt, ws);
  double rnorm = kernels::max_abs(ws.b.data(), n);
  int cg_total = 0;
  int newton = 0;
  for (; newton < 50; ++newton) {
    if (rnorm <= 1e-14) break;
    cg_total += solve_sym_cg(nl, grid, u, dt, ws, ws.delta, 1e-10);
    // damped update: halve until the residual decreases
    double lam = 1.0;
    double new_rnorm = rnorm;
    std::vector<double>& trial = ws.sw;  // reuse scratch
    for (int back = 0; back < 12; ++back) {
      trial = u;
      kernels::axpy(lam, ws.delta.data(), trial.data(), n);
      assemble_residual(nl, grid, trial, un, dt, ws);
      new_rnorm = kernels::max_abs(ws.b.data(), n);
      if (new_rnorm < rnorm || lam < 1e-4) break;
      lam *= 0.5;
    }
    u.swap(trial);
    const double upd = lam * kernels::max_abs(ws.delta.data(), n);
    rnorm = new_rnorm;
    if (upd <= 1e-12) {
      ++newton;
      break;
    }
  }
  if (newton >= 50)
    throw numerical_error("step: Newton did not converge, residual " +
                          std::to_string(rnorm));

  // discrete maximum principle trap: data in [0,1] must stay in [0,1]
  for (std::size_t i = 0; i < n; ++i) {
    if (grid.mask[i] != NodeMask::interior) continue;
    if (u[i] < -1e-9 || u[i] > 1.0 + 1e-9)
      throw numerical_error("step: maximum principle violated, u = " +
                            std::to_string(u[i]));
  }
  if (stats) {
    stats->newton_iters = newton;
    stats->cg_iters = cg_total;
    stats->residual = rnorm;
  }
  return u;
}

Field solve(const Nonlinearity& nl, const DomainGeometry& dom,
            std::shared_ptr<const Grid> grid, ProblemKind prob,
            std::vector<double> output_times, TimeSchedule schedule) {
  if (output_times.empty())
    throw validation_error("solve: need at least one output time");
  std::sort(output_times.begin(), output_times.end());
  if (!(output_times.front() > 0.0))
    throw validation_error("solve: output times must be positive");
  const double t_min = output_times.front();
  if (std::sqrt(nl.delta1 * t_min) < 3.0 * grid->max_h())
    throw validation_error(
        "solve: resolution rule sqrt(delta1 t_min) >= 3h violated");

  Field field;
  field.grid = grid;
  field.problem = prob;
  field.schedule = schedule;

  const std::size_t n = grid->num_nodes();
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    switch (grid->mask[i]) {
      case NodeMask::interior:
        u[i] = prob == ProblemKind::cauchy
                   ? (grid->node_distance[i] <= 0.0 ? 1.0 : 0.0)
                   : 0.0;
        break;
      case NodeMask::boundary:
        u[i] = grid->boundary_value[i];
        break;
      case NodeMask::exterior:
        u[i] = prob == ProblemKind::ibvp ? 1.0 : 0.0;
        break;
    }
  }
  field.initial = u;

  const double dt0 = schedule.dt0_fraction * t_min;
  const double g1 = schedule.growth - 1.0;
  double t = 0.0;
  for (double target : output_times) {
    while (t < target - 1e-15 * target) {
      double dt = std::max(dt0, g1 * t);
      dt = std::min(dt, target - t);
      StepStats st;
      u = step(nl, *grid, u, dt, &st);
      field.stats.push_back(st);
      t += dt;
    }
    field.times.push_back(target);
    field.values.push_back(u);
  }
  return field;
}

OrderingReport ordering_check(const Field& lower, const Field& upper,
                              double slack) {
  if (lower.times != upper.times)
    throw validation_error("ordering_check: time grids differ");
  if (lower.grid->num_nodes() != upper.grid->num_nodes())
    throw validation_error("ordering_check: grids differ");
  const std::size_t n = lower.grid->num_nodes();
  double worst = 0.0;
  auto active = [](NodeMask m) { return m != NodeMask::exterior; };
  for (std::size_t i = 0; i < n; ++i) {
    if (!active(lower.grid->mask[i]) || !active(upper.grid->mask[i])) continue;
    worst = std::max(worst, lower.initial[i] - upper.initial[i]);
  }
  for (std::size_t k = 0; k < lower.times.size(); ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (!active(lower.grid->mask[i]) || !active(upper.grid->mask[i]))
        continue;
      worst = std::max(worst, lower.values[k][i] - upper.values[k][i]);
    }
  OrderingReport rep;
  rep.max_violation = std::max(worst, 0.0);
  rep.slack = slack;
  rep.passed = rep.max_violation <= slack;
  return rep;
}

}  // namespace nldiff
