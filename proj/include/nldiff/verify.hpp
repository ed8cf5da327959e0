#pragma once
// Verification harness: runs profile / geometry / PDE pipelines and scores
// measured quantities against the short-time predictions. Each check
// produces a VerificationReport with a parameter-decreasing measured
// series (t -> 0 or s -> 0), an extrapolated value, and a pass flag at a
// pinned tolerance.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nldiff/geometry.hpp"
#include "nldiff/pde.hpp"
#include "nldiff/selfsimilar.hpp"

namespace nldiff {

enum class VerifyTarget {
  varadhan,
  curvature_asymptotics,
  asympvol,
  barrier_sandwich,
  stationarity,
  ordering
};

std::string to_string(VerifyTarget t);

struct VerificationReport {
  VerifyTarget target = VerifyTarget::varadhan;
  double predicted = 0.0;
  bool predicted_infinite = false;
  std::vector<std::pair<double, double>> measured_series;  // param descending
  double extrapolated = 0.0;
  double relative_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  nlohmann::json extras;

  nlohmann::json to_json() const;
};

// sup over probe nodes (distance in [band_lo, band_hi], clear of the
// window frame) of |-4 t Phi(u) - d^2| / d^2, per recorded time; passes if
// the series decreases and the final value is within tolerance.
VerificationReport verify_varadhan(const Field& field,
                                   const PhiTransform& transform,
                                   const DomainGeometry& dom, double band_lo,
                                   double band_hi, double tolerance);

struct CurvatureRunConfig {
  std::array<double, 2> origin{0, 0};
  std::array<double, 2> extent{1, 1};
  std::array<int, 2> n{256, 256};
  TimeSchedule schedule;
  double tolerance = 0.1;
  // Divergence threshold for the kappa = 1/R case: measured Q at the
  // smallest t must exceed threshold_factor times the prediction computed
  // with kappa replaced by kappa - 1/(10R).
  double divergence_threshold_factor = 1.0;
};

// Q(t) = t^{-(N+1)/4} int_{B_R} u dx against
// c(phi,N) prod(1/R - kappa_j)^{-1/2}; two-point Richardson in sqrt(t).
VerificationReport verify_curvature_asymptotics(
    const Nonlinearity& nl, const DomainGeometry& dom, const TouchingBall& ball,
    ProblemKind problem, const std::vector<double>& t_series,
    const CurvatureRunConfig& cfg);

// f_-(d/sqrt t) <= u <= f_+(d/sqrt t) on probe nodes with d in
// [region_lo, region_hi] and recorded times in [t_lo, t_hi]; the series
// carries the worst sandwich margin per time (>= 0 means it holds).
VerificationReport barrier_sandwich_check(const Field& field,
                                          const BarrierPair& pair,
                                          const DomainGeometry& dom,
                                          double region_lo, double region_hi,
                                          double t_lo, double t_hi);

// max-min of u along the level surface {d = R} (graph extracted by
// sup-convolution), maximized over recorded times.
VerificationReport stationarity_score(const Field& field,
                                      const DomainGeometry& dom, double R,
                                      int n_samples, double tolerance);

// scaled level-set measures s^{-(N-1)/2} H^{N-1}(Gamma_s cap B_R) against
// the 2^{(N-1)/2} omega_{N-1} prod(1/R-kappa_j)^{-1/2} limit.
VerificationReport verify_asympvol(const DomainGeometry& dom,
                                   const TouchingBall& ball,
                                   const std::vector<double>& s_series,
                                   double tolerance, std::uint64_t seed);

VerificationReport ordering_report(const Field& lower, const Field& upper,
                                   double slack);

}  // namespace nldiff
