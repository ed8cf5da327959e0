#include "nldiff/selfsimilar.hpp"

#include <algorithm>
#include <cmath>

namespace nldiff {

namespace {

// ---------------------------------------------------------------------------
// Embedded Cash-Karp 4(5) integrator for the first-order system
//   f' = p / phi'(f),   p' = -xi/2 * f' = -xi p / (2 phi'(f)),
// where p = v' = phi'(f) f'. Shooting classifications need tight
// trajectories near the separatrix, hence the adaptive pair.
// ---------------------------------------------------------------------------

struct State {
  double f, p;
};

inline State rhs(const Nonlinearity& nl, double xi, const State& y) {
  const double fp = y.p / nl.dphi(y.f);
  return {fp, -0.5 * xi * fp};
}

struct Stepper {
  const Nonlinearity& nl;
  double rtol;
  double atol_f, atol_p;

  // One attempted step of size h from (xi, y); on acceptance returns true
  // and fills y_out and the suggested next h.
  bool try_step(double xi, const State& y, double h, State& y_out,
                double& h_next) const {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 3.0 / 10, a42 = -9.0 / 10, a43 = 6.0 / 5;
    static constexpr double a51 = -11.0 / 54, a52 = 5.0 / 2,
                            a53 = -70.0 / 27, a54 = 35.0 / 27;
    static constexpr double a61 = 1631.0 / 55296, a62 = 175.0 / 512,
                            a63 = 575.0 / 13824, a64 = 44275.0 / 110592,
                            a65 = 253.0 / 4096;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 3.0 / 5,
                            c5 = 1.0, c6 = 7.0 / 8;
    static constexpr double b1 = 37.0 / 378, b3 = 250.0 / 621,
                            b4 = 125.0 / 594, b6 = 512.0 / 1771;
    static constexpr double e1 = 37.0 / 378 - 2825.0 / 27648,
                            e3 = 250.0 / 621 - 18575.0 / 48384,
                            e4 = 125.0 / 594 - 13525.0 / 55296,
                            e5 = -277.0 / 14336, e6 = 512.0 / 1771 - 1.0 / 4;

    const State k1 = rhs(nl, xi, y);
    const State k2 = rhs(nl, xi + c2 * h, {y.f + h * a21 * k1.f,
                                           y.p + h * a21 * k1.p});
    const State k3 = rhs(nl, xi + c3 * h,
                         {y.f + h * (a31 * k1.f + a32 * k2.f),
                          y.p + h * (a31 * k1.p + a32 * k2.p)});
    const State k4 = rhs(nl, xi + c4 * h,
                         {y.f + h * (a41 * k1.f + a42 * k2.f + a43 * k3.f),
                          y.p + h * (a41 * k1.p + a42 * k2.p + a43 * k3.p)});
    const State k5 =
        rhs(nl, xi + c5 * h,
            {y.f + h * (a51 * k1.f + a52 * k2.f + a53 * k3.f + a54 * k4.f),
             y.p + h * (a51 * k1.p + a52 * k2.p + a53 * k3.p + a54 * k4.p)});
    const State k6 =
        rhs(nl, xi + c6 * h,
            {y.f + h * (a61 * k1.f + a62 * k2.f + a63 * k3.f + a64 * k4.f +
                        a65 * k5.f),
             y.p + h * (a61 * k1.p + a62 * k2.p + a63 * k3.p + a64 * k4.p +
                        a65 * k5.p)});

    y_out = {y.f + h * (b1 * k1.f + b3 * k3.f + b4 * k4.f + b6 * k6.f),
             y.p + h * (b1 * k1.p + b3 * k3.p + b4 * k4.p + b6 * k6.p)};
    const double ef =
        h * (e1 * k1.f + e3 * k3.f + e4 * k4.f + e5 * k5.f + e6 * k6.f);
    const double ep =
        h * (e1 * k1.p + e3 * k3.p + e4 * k4.p + e5 * k5.p + e6 * k6.p);

    const double sf = atol_f + rtol * std::max(std::abs(y.f), std::abs(y_out.f));
    const double sp = atol_p + rtol * std::max(std::abs(y.p), std::abs(y_out.p));
    const double err = std::max(std::abs(ef) / sf, std::abs(ep) / sp);
    const double fac =
        std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
    h_next = h * fac;
    return err <= 1.0;
  }
};

enum class Shot { steep, shallow, converged };

struct ShootSetup {
  double tail_tol, xi_max, xi_class, rtol;
};

// Integrate one trial slope and classify the trajectory:
//   f < -1e-14                 -> steep (crossed zero)
//   p >= -1e-14 c, f > tail    -> shallow (flattened early)
//   end of domain              -> by f vs tail tolerance
Shot classify(const Nonlinearity& nl, double c, double p0,
              const ShootSetup& su) {
  Stepper st{nl, su.rtol, 1e-16 * c, 1e-16 * std::abs(p0)};
  State y{c, p0};
  double xi = 0.0, h = 1e-4;
  const double cross = -1e-14;
  const double flat = -1e-14 * c;
  for (int n = 0; n < 200000 && xi < su.xi_class; ++n) {
    h = std::min(h, su.xi_class - xi);
    State y1;
    double h_next;
    if (st.try_step(xi, y, h, y1, h_next)) {
      xi += h;
      y = y1;
      if (y.f < cross) return Shot::steep;
      if (y.p >= flat && y.f > su.tail_tol) return Shot::shallow;
    }
    h = h_next;
    if (h < 1e-14) throw numerical_error("shoot: step size underflow");
  }
  if (y.f > su.tail_tol) return Shot::shallow;
  return Shot::converged;
}

struct SlopeResult {
  double sigma;    // f'(0)
  double vprime0;  // phi'(c) * sigma
};

// Bisect the initial slope between the integrated envelope bounds
//   -c delta2 / (phi'(c) sqrt(pi delta1)) <= sigma <= -c delta1 / (phi'(c) sqrt(pi delta2))
// to a bracket width of 1e-13 c.
SlopeResult shoot_slope(const Nonlinearity& nl, double c,
                        const ShootSetup& su) {
  const double d1 = nl.delta1, d2 = nl.delta2;
  const double dpc = nl.dphi(c);
  double lo = -c * d2 / (dpc * std::sqrt(M_PI * d1));  // steep candidate
  double hi = -c * d1 / (dpc * std::sqrt(M_PI * d2));  // shallow candidate

  auto cls = [&](double sigma) { return classify(nl, c, dpc * sigma, su); };

  // The envelope can be tight (equality for linear phi); widen until the
  // endpoints classify, capped at a factor 2 beyond the envelope.
  bool ok_lo = false, ok_hi = false;
  for (int k = 0; k < 21 && !ok_lo; ++k) {
    const double cand = lo * (1.0 + 1e-6 * double(1 << k));
    if (cls(cand) == Shot::steep) {
      lo = cand;
      ok_lo = true;
    } else if (k == 20) {
      throw numerical_error("shoot: lower envelope bound did not cross zero");
    }
  }
  for (int k = 0; k < 21 && !ok_hi; ++k) {
    const double cand = hi * (1.0 - 1e-6 * double(1 << k));
    if (cls(cand) != Shot::steep) {
      hi = cand;
      ok_hi = true;
    } else if (k == 20) {
      throw numerical_error("shoot: upper envelope bound did not flatten");
    }
  }

  while (hi - lo > 1e-13 * c) {
    const double mid = 0.5 * (lo + hi);
    if (cls(mid) == Shot::steep)
      lo = mid;
    else
      hi = mid;
  }
  const double sigma = 0.5 * (lo + hi);
  return {sigma, dpc * sigma};
}

double default_xi_max(const Nonlinearity& nl, double c, double tail_tol) {
  // Gaussian envelope f(xi) <= A exp(-xi^2/(4 delta2)), A = c (d2/d1)^{3/2}
  const double A = c * std::pow(nl.delta2 / nl.delta1, 1.5);
  const double spec = std::sqrt(4.0 * nl.delta2 *
                                std::abs(std::log(tail_tol / c)));
  const double need = std::sqrt(4.0 * nl.delta2 * std::log(A / tail_tol));
  return std::max({10.0, spec, need});
}

// Tabulate the final trajectory on a uniform grid; once f drops below
// c * 1e-7 the slope-bisection noise dominates, so the tail is continued
// with the linearized decay p ~ exp(-xi^2/(4 phi'(0))).
void tabulate(const Nonlinearity& nl, double c, double p0,
              const ShootSetup& su, int n_nodes, Profile& out) {
  const double dxi = su.xi_max / (n_nodes - 1);
  out.xi_grid.resize(n_nodes);
  out.f_values.resize(n_nodes);
  out.v_values.resize(n_nodes);
  out.xi_grid[0] = 0.0;
  out.f_values[0] = c;
  out.v_values[0] = p0;

  Stepper st{nl, su.rtol, 1e-16 * c, 1e-16 * std::abs(p0)};
  State y{c, p0};
  double h = 1e-4;
  const double f_switch = 1e-7 * c;
  const double a = nl.dphi(0.0);
  int j = 1;
  for (; j < n_nodes; ++j) {
    const double target = j * dxi;
    double xi = (j - 1) * dxi;
    bool switched = false;
    while (xi < target - 1e-15 * su.xi_max) {
      const double hs = std::min(h, target - xi);
      State y1;
      double h_next;
      if (st.try_step(xi, y, hs, y1, h_next)) {
        xi += hs;
        y = y1;
      }
      h = (hs == h) ? h_next : std::min(h_next, h);
      if (h < 1e-14) throw numerical_error("tabulate: step size underflow");
      if (y.f <= f_switch) {
        switched = true;
        break;
      }
    }
    if (switched || y.f <= f_switch) break;
    out.xi_grid[j] = target;
    out.f_values[j] = y.f;
    out.v_values[j] = y.p;
  }
  if (j < n_nodes) {
    // analytic tail from the last accurate interior point
    const int m = j - 1;
    const double xi_m = out.xi_grid[m];
    const double f_m = out.f_values[m];
    const double p_m = out.v_values[m];
    const double em = std::erfc(xi_m / (2.0 * std::sqrt(a)));
    for (; j < n_nodes; ++j) {
      const double xi = j * dxi;
      out.xi_grid[j] = xi;
      out.f_values[j] = f_m * std::erfc(xi / (2.0 * std::sqrt(a))) / em;
      out.v_values[j] =
          p_m * std::exp(-(xi * xi - xi_m * xi_m) / (4.0 * a));
    }
  }
}

void check_half_line_invariants(const Profile& p) {
  const auto& f = p.f_values;
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (!(f[i] < f[i - 1]))
      throw numerical_error("profile: f not strictly decreasing");
    if (!(f[i] > 0.0)) throw numerical_error("profile: f not positive");
  }
  if (!(f.back() <= p.tail_tolerance * 1.0001))
    throw numerical_error("profile: tail above tolerance");
}

ShootSetup make_setup(const Nonlinearity& nl, double c,
                      const ProfileOptions& opt, double& tail_tol,
                      double& xi_max) {
  if (!(c > 0.0)) throw validation_error("profile: c must be positive");
  tail_tol = opt.tail_tolerance > 0.0 ? opt.tail_tolerance : 1e-12 * c;
  xi_max = opt.xi_max > 0.0 ? opt.xi_max : default_xi_max(nl, c, tail_tol);
  const double A = c * std::pow(nl.delta2 / nl.delta1, 1.5);
  if (A * std::exp(-xi_max * xi_max / (4.0 * nl.delta2)) > tail_tol)
    throw validation_error("profile: xi_max too small for tail tolerance");
  return {tail_tol, xi_max, xi_max + 2.0, opt.rtol};
}

}  // namespace

Profile solve_half_line(const Nonlinearity& nl, double c,
                        const ProfileOptions& opt) {
  double tail_tol, xi_max;
  const ShootSetup su = make_setup(nl, c, opt, tail_tol, xi_max);
  const SlopeResult sr = shoot_slope(nl, c, su);

  Profile p;
  p.kind = ProfileKind::half_line;
  p.c = c;
  p.v_prime_at_zero = sr.vprime0;
  p.tail_tolerance = tail_tol;
  p.delta1 = nl.delta1;
  p.delta2 = nl.delta2;
  p.a_tail = nl.dphi(0.0);
  tabulate(nl, c, sr.vprime0, su, opt.n_nodes, p);
  check_half_line_invariants(p);
  return p;
}

Profile solve_half_line(const Nonlinearity& nl, double c, double tail_tolerance,
                        double xi_max) {
  ProfileOptions opt;
  opt.tail_tolerance = tail_tolerance;
  opt.xi_max = xi_max;
  return solve_half_line(nl, c, opt);
}

Profile solve_whole_line(const Nonlinearity& nl, double c,
                         const ProfileOptions& opt) {
  if (!(c > 0.0)) throw validation_error("profile: c must be positive");
  // psi(s) = phi(c) - phi(c - s) satisfies the same derivative bounds
  const double phic = nl.phi(c);
  Nonlinearity psi = make_nonlinearity(
      [phic, phi = nl.phi, c](double s) { return phic - phi(c - s); },
      [dphi = nl.dphi, c](double s) { return dphi(c - s); }, nl.delta1,
      nl.delta2, nl.name + ":psi", nl.smoothness);

  double tail_phi, ximax_phi, tail_psi, ximax_psi;
  const ShootSetup su_phi = make_setup(nl, c, opt, tail_phi, ximax_phi);
  const ShootSetup su_psi = make_setup(psi, c, opt, tail_psi, ximax_psi);

  // V_a'(0) is strictly decreasing and v_{c-a}'(0) strictly increasing in a,
  // so the slope mismatch m(a) changes sign exactly once on (0, c).
  auto mismatch = [&](double a) {
    ShootSetup sg = su_psi, sf = su_phi;
    sg.tail_tol = std::min(tail_psi, 1e-12 * a);
    sf.tail_tol = std::min(tail_phi, 1e-12 * (c - a));
    const double Vp = shoot_slope(psi, a, sg).vprime0;
    const double vp = shoot_slope(nl, c - a, sf).vprime0;
    return Vp - vp;
  };

  double a_lo = 1e-3 * c, a_hi = c * (1.0 - 1e-3);
  double m_lo = mismatch(a_lo), m_hi = mismatch(a_hi);
  for (int k = 0; k < 8 && !(m_lo > 0.0); ++k) {
    a_lo *= 0.1;
    m_lo = mismatch(a_lo);
  }
  for (int k = 0; k < 8 && !(m_hi < 0.0); ++k) {
    a_hi = c - 0.1 * (c - a_hi);
    m_hi = mismatch(a_hi);
  }
  if (!(m_lo > 0.0) || !(m_hi < 0.0))
    throw numerical_error("whole-line: bisection endpoints fail sign condition");
  while (a_hi - a_lo > 1e-12 * c) {
    const double mid = 0.5 * (a_lo + a_hi);
    if (mismatch(mid) > 0.0)
      a_lo = mid;
    else
      a_hi = mid;
  }
  const double a_star = 0.5 * (a_lo + a_hi);

  Profile right = solve_half_line(nl, c - a_star, opt);
  Profile left = solve_half_line(psi, a_star, opt);

  const double slope_gap =
      std::abs(left.v_prime_at_zero - right.v_prime_at_zero);
  if (slope_gap > 1e-9)
    throw numerical_error("whole-line: slope mismatch at xi=0 is " +
                          std::to_string(slope_gap));

  Profile p;
  p.kind = ProfileKind::whole_line;
  p.c = c;
  p.v_prime_at_zero = right.v_prime_at_zero;
  p.match_point = a_star;
  p.tail_tolerance = std::max(right.tail_tolerance, left.tail_tolerance);
  p.delta1 = nl.delta1;
  p.delta2 = nl.delta2;
  p.a_tail = nl.dphi(0.0);

  // reflect the psi-problem grid; the duplicate node at xi = 0 is dropped
  const std::size_t nl_nodes = left.xi_grid.size();
  for (std::size_t i = nl_nodes; i-- > 1;) {
    p.xi_grid.push_back(-left.xi_grid[i]);
    p.f_values.push_back(c - left.f_values[i]);
    p.v_values.push_back(left.v_values[i]);
  }
  p.xi_grid.insert(p.xi_grid.end(), right.xi_grid.begin(),
                   right.xi_grid.end());
  p.f_values.insert(p.f_values.end(), right.f_values.begin(),
                    right.f_values.end());
  p.v_values.insert(p.v_values.end(), right.v_values.begin(),
                    right.v_values.end());

  for (std::size_t i = 1; i < p.f_values.size(); ++i)
    if (!(p.f_values[i] < p.f_values[i - 1]))
      throw numerical_error("whole-line profile: f not strictly decreasing");
  return p;
}

Profile solve_whole_line(const Nonlinearity& nl, double c,
                         double tail_tolerance, double xi_max) {
  ProfileOptions opt;
  opt.tail_tolerance = tail_tolerance;
  opt.xi_max = xi_max;
  return solve_whole_line(nl, c, opt);
}

void Profile::ensure_interp() const {
  if (!interp_f_.empty()) return;
  interp_f_ = MonotoneCubic(xi_grid, f_values);
  interp_v_ = MonotoneCubic(xi_grid, v_values);
}

double Profile::eval(double xi) const {
  ensure_interp();
  return interp_f_(xi);
}

double Profile::eval_vprime(double xi) const {
  ensure_interp();
  return interp_v_(xi);
}

double mass_identity_residual(const Profile& p) {
  const auto& xi = p.xi_grid;
  const auto& f = p.f_values;
  // trapezoid over the xi >= 0 part of the grid
  double I = 0.0;
  for (std::size_t i = 1; i < xi.size(); ++i) {
    if (xi[i] <= 0.0) continue;
    const double x0 = std::max(xi[i - 1], 0.0);
    double f0 = f[i - 1];
    if (xi[i - 1] < 0.0) f0 = p.eval(0.0);
    I += 0.5 * (f0 + f[i]) * (xi[i] - x0);
  }
  // Gaussian upper-envelope correction beyond the last node
  const double L = xi.back();
  const double vp0 = -p.v_prime_at_zero;
  I += vp0 * (2.0 * p.delta2 * kSqrtPi / p.delta1) *
       ierfc(L / (2.0 * std::sqrt(p.delta2)));
  return std::abs(vp0 - 0.5 * I);
}

VaradhanRatio varadhan_ratio(const Profile& p, const PhiTransform& transform,
                             double xi) {
  if (!(xi > 0.0)) throw validation_error("varadhan_ratio: xi must be positive");
  if (xi < p.xi_grid.front() || xi > p.xi_grid.back())
    throw validation_error("varadhan_ratio: xi outside tabulated grid");
  const double f = p.eval(xi);
  if (f < 1e-280) {
    // below representable range for the quadrature: extrapolate with the
    // Gaussian envelope in log space
    const double logf = std::log(std::max(p.f_values.back(), 1e-300)) -
                        (xi * xi - p.xi_grid.back() * p.xi_grid.back()) /
                            (4.0 * p.a_tail);
    const double phi_val = transform.nl.dphi(0.0) * logf;
    return {-4.0 * phi_val / (xi * xi), true};
  }
  return {-4.0 * transform.Phi(f) / (xi * xi), false};
}

void BarrierPair::ensure_interp() const {
  if (!interp_m_.empty()) return;
  interp_m_ = MonotoneCubic(xi_grid, f_minus);
  interp_p_ = MonotoneCubic(xi_grid, f_plus);
}

double BarrierPair::eval_minus(double xi) const {
  ensure_interp();
  return interp_m_(std::max(xi, xi_grid.front()));
}

double BarrierPair::eval_plus(double xi) const {
  ensure_interp();
  return interp_p_(std::max(xi, xi_grid.front()));
}

BarrierPair barrier_profiles(const Nonlinearity& nl, double epsilon,
                             double eta, ProfileKind kind) {
  if (!(epsilon > 0.0 && epsilon < 0.25))
    throw validation_error("barrier_profiles: need 0 < epsilon < 1/4");
  if (!(eta > 0.0 && eta <= epsilon / 10.0))
    throw validation_error("barrier_profiles: need 0 < eta <= epsilon/10");

  auto solve = [&](double level) {
    return kind == ProfileKind::half_line ? solve_half_line(nl, level)
                                          : solve_whole_line(nl, level);
  };
  const Profile lo = solve(1.0 - epsilon);
  const Profile hi = solve(1.0 + epsilon);

  const double sm = std::sqrt(1.0 + 2.0 * eta);  // argument scale for f_-
  const double sp = std::sqrt(1.0 - 2.0 * eta);  // argument scale for f_+

  BarrierPair bp;
  bp.epsilon = epsilon;
  bp.eta = eta;
  bp.kind = kind;
  const double xi_end =
      std::min(lo.xi_grid.back() / sm, hi.xi_grid.back() / sp);
  const int n = 4097;
  bp.xi_grid.resize(n);
  bp.f_minus.resize(n);
  bp.f_plus.resize(n);
  for (int i = 0; i < n; ++i) {
    const double xi = eta + (xi_end - eta) * i / (n - 1);
    bp.xi_grid[i] = xi;
    bp.f_minus[i] = lo.eval(sm * xi);
    bp.f_plus[i] = hi.eval(sp * xi);
  }
  return bp;
}

double asymptotic_constant(const Profile& f1, int N) {
  if (N < 2) throw validation_error("asymptotic_constant: need N >= 2");
  const double nu = 0.5 * (N - 1);
  // substitute xi = u^2 so the integrand is smooth at the origin
  const double L = f1.xi_grid.back();
  const double U = std::sqrt(L);
  const int n = 8192;  // composite Simpson, even count
  const double du = U / n;
  double I = 0.0;
  auto g = [&](double u) {
    const double xi = u * u;
    return 2.0 * f1.eval(std::min(xi, L)) * std::pow(u, 2.0 * nu + 1.0);
  };
  for (int i = 0; i < n; i += 2)
    I += du / 3.0 *
         (g(i * du) + 4.0 * g((i + 1) * du) + g((i + 2) * du));
  // envelope bound for the tail beyond the tabulated range
  const double vp0 = -f1.v_prime_at_zero;
  const double tail = adaptive_simpson(
      [&](double xi) {
        return vp0 / f1.delta1 * gauss_tail(xi, f1.delta2) * std::pow(xi, nu);
      },
      L, L + 10.0 * std::sqrt(f1.delta2), 1e-16);
  return std::pow(2.0, nu) * ball_volume(N - 1) * (I + tail);
}

double asymptotic_constant(const Nonlinearity& nl, int N, ProfileKind kind) {
  const Profile f1 = kind == ProfileKind::half_line
                         ? solve_half_line(nl, 1.0)
                         : solve_whole_line(nl, 1.0);
  return asymptotic_constant(f1, N);
}

}  // namespace nldiff
