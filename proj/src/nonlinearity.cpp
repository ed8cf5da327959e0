#include "nldiff/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

namespace nldiff {

namespace {
constexpr int kValidationSamples = 10000;
constexpr double kValidationLo = -10.0, kValidationHi = 10.0;
constexpr double kPhiZeroTol = 1e-12;
constexpr double kBoundSlack = 1e-9;
constexpr double kPhiSplit = 1e-8;  // below this, quadrature is replaced
}  // namespace

Nonlinearity make_nonlinearity(std::function<double(double)> phi,
                               std::function<double(double)> dphi,
                               double delta1, double delta2, std::string name,
                               Smoothness smoothness) {
  if (!(delta1 > 0.0) || !(delta2 >= delta1))
    throw validation_error(name + ": need 0 < delta1 <= delta2");
  if (std::abs(phi(0.0)) > kPhiZeroTol)
    throw validation_error(name + ": phi(0) != 0");
  const double lo = delta1 * (1.0 - kBoundSlack);
  const double hi = delta2 * (1.0 + kBoundSlack);
  double prev = phi(kValidationLo);
  for (int k = 0; k < kValidationSamples; ++k) {
    const double s = kValidationLo + (kValidationHi - kValidationLo) *
                                         (k + 0.5) / kValidationSamples;
    const double d = dphi(s);
    if (!(d >= lo) || !(d <= hi))
      throw validation_error(name + ": dphi(" + std::to_string(s) +
                             ") = " + std::to_string(d) +
                             " outside [delta1, delta2]");
    const double p = phi(s);
    if (!(p > prev))
      throw validation_error(name + ": phi not strictly increasing");
    prev = p;
  }
  return Nonlinearity{std::move(phi), std::move(dphi), delta1, delta2,
                      std::move(name), smoothness};
}

Nonlinearity make_heat() {
  return make_nonlinearity([](double s) { return s; },
                           [](double) { return 1.0; }, 1.0, 1.0, "heat");
}

Nonlinearity make_sine(double a) {
  if (!(std::abs(a) < 1.0)) throw validation_error("make_sine: need |a| < 1");
  return make_nonlinearity(
      [a](double s) { return s + a * std::sin(s); },
      [a](double s) { return 1.0 + a * std::cos(s); }, 1.0 - std::abs(a),
      1.0 + std::abs(a), "sine(" + std::to_string(a) + ")");
}

namespace {
// smoothstep and its integral, clamped outside [0,1]
double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * (3.0 - 2.0 * x);
}
double smoothstep_int(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return x - 0.5;
  return x * x * x * (1.0 - 0.5 * x);
}
}  // namespace

Nonlinearity make_ramp(double k1, double k2, double s0, double w) {
  if (!(w > 0.0) || !(s0 - w > 0.0))
    throw validation_error("make_ramp: transition must sit in s > 0");
  const double a = s0 - w, width = 2.0 * w;
  auto phi = [=](double s) {
    return k1 * s + (k2 - k1) * width * smoothstep_int((s - a) / width);
  };
  auto dphi = [=](double s) {
    return k1 + (k2 - k1) * smoothstep((s - a) / width);
  };
  return make_nonlinearity(phi, dphi, std::min(k1, k2), std::max(k1, k2),
                           "ramp");
}

Nonlinearity make_tabulated(const std::vector<double>& s,
                            const std::vector<double>& phi_values,
                            std::string name) {
  auto spline = std::make_shared<MonotoneCubic>(s, phi_values);
  const double slo = s.front(), shi = s.back();
  const double dlo = spline->deriv(slo), dhi = spline->deriv(shi);
  const double ylo = (*spline)(slo), yhi = (*spline)(shi);
  // linear extension beyond the table with the end slopes
  auto phi = [=](double x) {
    if (x < slo) return ylo + dlo * (x - slo);
    if (x > shi) return yhi + dhi * (x - shi);
    return (*spline)(x);
  };
  auto dphi = [=](double x) {
    if (x < slo) return dlo;
    if (x > shi) return dhi;
    return spline->deriv(x);
  };
  // derivative bounds estimated on the validation sample grid plus a
  // dense sweep of the table span
  double d1 = dlo, d2 = dlo;
  auto take = [&](double x) {
    const double d = dphi(x);
    d1 = std::min(d1, d);
    d2 = std::max(d2, d);
  };
  for (int k = 0; k < kValidationSamples; ++k)
    take(kValidationLo +
         (kValidationHi - kValidationLo) * (k + 0.5) / kValidationSamples);
  for (int k = 0; k <= 20000; ++k) take(slo + (shi - slo) * k / 20000.0);
  if (!(d1 > 0.0))
    throw validation_error(name + ": tabulated phi not uniformly increasing");
  return make_nonlinearity(phi, dphi, d1 * (1.0 - 1e-9), d2 * (1.0 + 1e-9),
                           std::move(name), Smoothness::c1_tabulated);
}

Nonlinearity load_tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path);
  std::vector<double> s, p;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (ls >> a >> b) {
      s.push_back(a);
      p.push_back(b);
    }
  }
  if (s.size() < 4) throw validation_error(path + ": too few table rows");
  return make_tabulated(s, p, "tabulated:" + path);
}

double PhiTransform::Phi(double s) const {
  if (!(s > 0.0)) throw validation_error("Phi: s must be positive");
  double head = 0.0, s_eff = s;
  if (s < kPhiSplit) {
    head = nl.dphi(0.0) * (std::log(s) - std::log(kPhiSplit));
    s_eff = kPhiSplit;
  }
  if (s_eff == 1.0) return head;
  // substitute xi = e^u: int_1^s phi'(xi)/xi dxi = int_0^{log s} phi'(e^u) du
  const double L = std::log(s_eff);
  const double I = adaptive_simpson(
      [this](double u) { return nl.dphi(std::exp(u)); }, std::min(0.0, L),
      std::max(0.0, L), quadrature_tolerance);
  return head + (L >= 0.0 ? I : -I);
}

double PhiTransform::Psi(double y) const {
  // bracket in u = log s from delta1*u <= Phi(e^u) <= delta2*u (u >= 0,
  // reversed for u <= 0), widened slightly for roundoff
  double u_lo, u_hi;
  if (y >= 0.0) {
    u_lo = y / nl.delta2;
    u_hi = y / nl.delta1;
  } else {
    u_lo = y / nl.delta1;
    u_hi = y / nl.delta2;
  }
  const double pad = 1e-9 * (1.0 + std::abs(y) / nl.delta1);
  u_lo -= pad;
  u_hi += pad;
  auto g = [&](double u) { return Phi(std::exp(u)) - y; };
  double u;
  try {
    u = brent_root(g, u_lo, u_hi, 1e-14, 5e-11, 200);
  } catch (const numerical_error& e) {
    throw numerical_error(std::string("Psi: ") + e.what());
  }
  return std::exp(u);
}

}  // namespace nldiff
