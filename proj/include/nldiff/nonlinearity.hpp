#pragma once
// Admissible nonlinearities phi for d_t u = Lap(phi(u)):
// phi(0) = 0 and 0 < delta1 <= phi'(s) <= delta2 on the validation range,
// so the equation is uniformly parabolic. Also hosts the transform
// Phi(s) = int_1^s phi'(xi)/xi d xi and its inverse Psi.

#include <functional>
#include <string>
#include <vector>

#include "nldiff/numerics.hpp"

namespace nldiff {

enum class Smoothness { c2, c1_tabulated };

struct Nonlinearity {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
  double delta1 = 0.0;  // lower derivative bound
  double delta2 = 0.0;  // upper derivative bound
  std::string name;
  Smoothness smoothness = Smoothness::c2;
};

// Validates phi(0) = 0 (tolerance 1e-12) and delta1 <= dphi <= delta2 on
// 1e4 uniform samples over [-10, 10]; throws validation_error otherwise.
Nonlinearity make_nonlinearity(std::function<double(double)> phi,
                               std::function<double(double)> dphi,
                               double delta1, double delta2, std::string name,
                               Smoothness smoothness = Smoothness::c2);

Nonlinearity make_heat();
// phi(s) = s + a sin(s), |a| < 1
Nonlinearity make_sine(double a);
// two-slope ramp with a smoothstep transition of phi' over [s0-w, s0+w]
Nonlinearity make_ramp(double k1, double k2, double s0, double w);
// monotone cubic interpolation of a strictly increasing (s, phi) table;
// flagged Smoothness::c1_tabulated rather than rejected
Nonlinearity make_tabulated(const std::vector<double>& s,
                            const std::vector<double>& phi_values,
                            std::string name = "tabulated");
Nonlinearity load_tabulated_csv(const std::string& path);

struct PhiTransform {
  Nonlinearity nl;
  double quadrature_tolerance = 1e-12;

  // Phi(s) for s > 0; integrable-divergent near 0, so below s = 1e-8 the
  // quadrature is replaced by the analytic envelope phi'(0) * log.
  double Phi(double s) const;
  // Inverse of Phi; bracketed by delta1*log s <= Phi(s) <= delta2*log s,
  // then refined until |Phi(Psi(y)) - y| <= 1e-10.
  double Psi(double y) const;
};

}  // namespace nldiff
