#pragma once
// Self-similar profiles f_c of (phi'(f) f')' + xi/2 f' = 0, solved by
// shooting on the initial slope: the half-line problem (f(0)=c, f -> 0)
// and the whole-line problem (f -> c at -inf, f -> 0 at +inf), plus the
// derived quantities used by the verification harness: the mass identity
// -v'(0) = 1/2 int_0^inf f, the ratio -4 Phi(f(xi))/xi^2, the scaled
// barrier pair f_{1 +- eps}(sqrt(1 -+ 2 eta) xi), and the moment constant
// c(phi,N) = 2^{(N-1)/2} omega_{N-1} int_0^inf f_1(xi) xi^{(N-1)/2} dxi.

#include <optional>
#include <vector>

#include "nldiff/nonlinearity.hpp"
#include "nldiff/numerics.hpp"

namespace nldiff {

enum class ProfileKind { half_line, whole_line };

struct Profile {
  ProfileKind kind = ProfileKind::half_line;
  double c = 0.0;
  std::vector<double> xi_grid;   // half-line: starts at 0; whole-line: [-L', L]
  std::vector<double> f_values;
  std::vector<double> v_values;  // v'(xi) = phi'(f) f' at the nodes
  double v_prime_at_zero = 0.0;
  std::optional<double> match_point;  // a* for whole-line profiles

  double tail_tolerance = 0.0;
  double delta1 = 0.0, delta2 = 0.0;
  double a_tail = 0.0;  // phi'(0), governs the far-field Gaussian decay

  double eval(double xi) const;         // monotone cubic through the nodes
  double eval_vprime(double xi) const;

 private:
  mutable MonotoneCubic interp_f_, interp_v_;  // built lazily
  void ensure_interp() const;
};

struct ProfileOptions {
  double tail_tolerance = -1.0;  // default 1e-12 * c
  double xi_max = -1.0;          // default from the Gaussian envelope
  int n_nodes = 8193;
  double rtol = 1e-10;           // ODE integrator relative tolerance
};

Profile solve_half_line(const Nonlinearity& nl, double c,
                        double tail_tolerance = -1.0, double xi_max = -1.0);
Profile solve_half_line(const Nonlinearity& nl, double c,
                        const ProfileOptions& opt);

Profile solve_whole_line(const Nonlinearity& nl, double c,
                         double tail_tolerance = -1.0, double xi_max = -1.0);
Profile solve_whole_line(const Nonlinearity& nl, double c,
                         const ProfileOptions& opt);

// |(-v'(0)) - 1/2 int_0^inf f|, trapezoid on the grid plus the Gaussian
// envelope correction beyond the last node.
double mass_identity_residual(const Profile& p);

struct VaradhanRatio {
  double value = 0.0;
  bool saturated = false;  // f(xi) below representable range, envelope used
};
VaradhanRatio varadhan_ratio(const Profile& p, const PhiTransform& transform,
                             double xi);

struct BarrierPair {
  double epsilon = 0.0;
  double eta = 0.0;
  ProfileKind kind = ProfileKind::half_line;
  std::vector<double> xi_grid;           // starts at eta
  std::vector<double> f_minus, f_plus;   // scaled tabulations
  bool constant_below_eta = true;        // values on [0,eta) are f(eta)

  double eval_minus(double xi) const;
  double eval_plus(double xi) const;

 private:
  mutable MonotoneCubic interp_m_, interp_p_;
  void ensure_interp() const;
};

BarrierPair barrier_profiles(const Nonlinearity& nl, double epsilon,
                             double eta, ProfileKind kind);

double asymptotic_constant(const Nonlinearity& nl, int N,
                           ProfileKind kind = ProfileKind::half_line);
double asymptotic_constant(const Profile& f1, int N);

}  // namespace nldiff
