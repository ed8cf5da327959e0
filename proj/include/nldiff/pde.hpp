#pragma once
// Implicit finite-difference solver for d_t u = Lap(phi(u)) on uniform
// 1D/2D grids. Backward Euler in time; the nonlinear system per step is
// solved by damped Newton, with the linearization symmetrized to an SPD
// system and solved by conjugate gradients. Supports
//   ibvp:   u = 1 on the domain boundary, u = 0 initially in the domain;
//   cauchy: u = indicator of the domain complement initially.
// The computational window is truncated with Dirichlet far-field values.

#include <array>
#include <memory>
#include <vector>

#include "nldiff/geometry.hpp"
#include "nldiff/nonlinearity.hpp"

namespace nldiff {

enum class NodeMask : std::uint8_t { interior = 0, boundary = 1, exterior = 2 };
enum class ProblemKind { ibvp, cauchy };

struct Grid {
  int dimension = 2;
  std::array<double, 2> origin{0, 0};
  std::array<double, 2> extent{1, 1};
  std::array<int, 2> n{2, 1};  // nodes per axis (ny = 1 in 1D)
  std::array<double, 2> h{0, 0};
  std::vector<NodeMask> mask;
  std::vector<double> boundary_value;  // pinned value at boundary nodes
  std::vector<double> node_distance;   // signed distance to the domain boundary

  std::size_t num_nodes() const { return std::size_t(n[0]) * n[1]; }
  std::size_t idx(int ix, int iy) const { return std::size_t(iy) * n[0] + ix; }
  double x(int ix) const { return origin[0] + ix * h[0]; }
  double y(int iy) const { return origin[1] + iy * h[1]; }
  double max_h() const { return dimension == 2 ? std::max(h[0], h[1]) : h[0]; }
};

// Masks: interior nodes have positive signed distance and lie off the
// window frame; boundary nodes are the exterior-side neighbors of interior
// nodes (pinned 1 for the ibvp) plus the frame (pinned to far-field /
// initial data).
std::shared_ptr<Grid> build_grid(const DomainGeometry& dom, ProblemKind prob,
                                 std::array<double, 2> origin,
                                 std::array<double, 2> extent,
                                 std::array<int, 2> n);

struct TimeSchedule {
  double dt0_fraction = 1.0 / 200.0;  // dt floor = fraction * t_min
  double growth = 1.2;                // dt ~ (growth - 1) * t
};

struct StepStats {
  int newton_iters = 0;
  int cg_iters = 0;
  double residual = 0.0;
};

struct Field {
  std::shared_ptr<const Grid> grid;
  ProblemKind problem = ProblemKind::ibvp;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // one array per recorded time
  std::vector<double> initial;
  TimeSchedule schedule;
  std::vector<StepStats> stats;  // one per time step taken
};

// One backward-Euler step U - dt Lap(phi(U)) = un. Newton stops when the
// update max-norm is <= 1e-12; inner CG runs to relative residual 1e-10.
std::vector<double> step(const Nonlinearity& nl, const Grid& grid,
                         const std::vector<double>& un, double dt,
                         StepStats* stats = nullptr);

// Time-steps from t = 0 with dt growing geometrically in t, recording the
// requested output times. Enforces the resolution rule
// sqrt(delta1 * t_min) >= 3 max(h).
Field solve(const Nonlinearity& nl, const DomainGeometry& dom,
            std::shared_ptr<const Grid> grid, ProblemKind prob,
            std::vector<double> output_times, TimeSchedule schedule = {});

struct OrderingReport {
  double max_violation = 0.0;
  double slack = 0.0;
  bool passed = false;
};

// Checks lower <= upper + slack at every common active node and recorded
// time (discrete comparison-principle contract).
OrderingReport ordering_check(const Field& lower, const Field& upper,
                              double slack = 1e-8);

}  // namespace nldiff
