#pragma once
// Domain descriptions with signed distance and curvature queries, interior
// touching balls, sup/inf convolutions, and level-set measure estimates
// H^{N-1}({d = s} ∩ B_R) used by the short-time asymptotics checks.
// Dimensions N = 2, 3; graph domains are { x_N > f(x') }.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "nldiff/numerics.hpp"

namespace nldiff {

using Vec = std::array<double, 3>;  // points in R^N, N <= 3

inline double dot(const Vec& a, const Vec& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}
inline double norm(const Vec& a, int dim) { return std::sqrt(dot(a, a, dim)); }

// Graph function x_N = f(x') with analytic gradient and Hessian
// (hess is row-major, dl x dl with dl = N-1 <= 2).
struct GraphFn {
  int dim_lateral = 1;
  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad;
  std::function<std::array<double, 4>(const Vec&)> hess;
};

GraphFn graph_affine(int dl, Vec slope, double intercept);
GraphFn graph_parabola(int dl, double rho);  // |x'|^2 / (2 rho)
GraphFn graph_sine(int dl, double amplitude, double wavenumber,
                   double intercept);

enum class DomainKind { half_space, ball_interior, ball_exterior, graph_domain };

struct DomainGeometry {
  DomainKind kind = DomainKind::half_space;
  int dimension = 2;
  Vec normal{0, 1, 0};  // half_space: { x . normal > offset }, |normal| = 1
  double offset = 0.0;
  Vec center{0, 0, 0};  // ball kinds
  double radius = 1.0;
  GraphFn graph;  // graph_domain

  static DomainGeometry half_space(int N, Vec n, double offset);
  static DomainGeometry ball_interior(int N, Vec center, double radius);
  static DomainGeometry ball_exterior(int N, Vec center, double radius);
  static DomainGeometry graph_domain(int N, GraphFn g);
};

// Positive inside the domain, negative outside. Closed form except for
// graph domains, where the boundary is sampled over an auto-expanded
// window and the best foot point is polished; accuracy 1e-8.
double signed_distance(const DomainGeometry& dom, const Vec& x);

// Unit normal at a boundary point, pointing into the domain.
Vec inward_normal(const DomainGeometry& dom, const Vec& y);

// Principal curvatures at a boundary point with respect to the inward
// normal; an interior touching ball of radius R satisfies kappa_j <= 1/R.
std::vector<double> principal_curvatures(const DomainGeometry& dom,
                                         const Vec& y);

struct TouchingBall {
  Vec center{0, 0, 0};
  double radius = 0.0;
  Vec contact_point{0, 0, 0};
  std::vector<double> curvatures;
};

// Builds the ball of radius R touching the boundary at `contact` from the
// inside and validates the contact geometry and the curvature convention
// (prod(1/R - kappa_j) >= 0).
TouchingBall make_touching_ball(const DomainGeometry& dom, const Vec& contact,
                                double R);

struct MeasureEstimate {
  double value = 0.0;
  double stderr_est = 0.0;  // zero for deterministic methods
  std::string method;       // "closed-form", "contour", "mc-shell"
};

struct MCOptions {
  double target_rel_stderr = 0.003;
  std::uint64_t max_samples = 1ull << 31;
  std::uint64_t batch = 1ull << 18;
};

// H^{N-1}({x : d(x) = s} ∩ B_R(ball.center)). Closed form for half-space
// and sphere boundaries; marching-squares arc length for 2D graphs;
// Monte-Carlo shell estimate (counter-based streams) for 3D graphs.
MeasureEstimate level_set_measure(const DomainGeometry& dom, double s,
                                  const TouchingBall& ball,
                                  std::uint64_t seed = 12345,
                                  const MCOptions& mc = {});

// g(x') = sup over |x'-y'| <= R of { f(y') + sqrt(R^2 - |x'-y'|^2) },
// grid-searched then polished; inf_convolution is the mirror image.
double sup_convolution(const GraphFn& f, double R, const Vec& xprime);
double inf_convolution(const GraphFn& g, double R, const Vec& xprime);

// 2D contour segments of d(x) = s clipped to the ball, for CSV export.
std::vector<std::array<double, 4>> contour_segments(const DomainGeometry& dom,
                                                    double s,
                                                    const TouchingBall& ball);

}  // namespace nldiff
