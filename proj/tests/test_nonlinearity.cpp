#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "nldiff/nonlinearity.hpp"

using namespace nldiff;

TEST_CASE("builtin nonlinearities validate") {
  const Nonlinearity heat = make_heat();
  CHECK(heat.delta1 == 1.0);
  CHECK(heat.delta2 == 1.0);

  const Nonlinearity sine = make_sine(0.1);
  CHECK(sine.delta1 == doctest::Approx(0.9));
  CHECK(sine.delta2 == doctest::Approx(1.1));
  CHECK(sine.phi(0.0) == 0.0);

  const Nonlinearity ramp = make_ramp(0.8, 1.2, 0.4, 0.1);
  CHECK(ramp.phi(0.0) == 0.0);
  CHECK(ramp.dphi(0.0) == doctest::Approx(0.8));
  CHECK(ramp.dphi(1.0) == doctest::Approx(1.2));
}

TEST_CASE("degenerate diffusion is rejected") {
  // phi(s) = s^2 has dphi(0) = 0, outside [delta1, delta2]
  CHECK_THROWS_AS(make_nonlinearity([](double s) { return s * s; },
                                    [](double s) { return 2.0 * s; }, 0.5,
                                    25.0, "square"),
                  validation_error);
  // phi(0) != 0
  CHECK_THROWS_AS(make_nonlinearity([](double s) { return s + 0.1; },
                                    [](double) { return 1.0; }, 1.0, 1.0,
                                    "shifted"),
                  validation_error);
  // delta1 must be positive
  CHECK_THROWS_AS(make_nonlinearity([](double s) { return s; },
                                    [](double) { return 1.0; }, 0.0, 1.0,
                                    "flat"),
                  validation_error);
}

TEST_CASE("Phi closed forms for the heat case") {
  const PhiTransform tr{make_heat()};
  // Phi = log for phi(s) = s
  CHECK(tr.Phi(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(tr.Phi(1.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(tr.Phi(0.5) == doctest::Approx(std::log(0.5)).epsilon(1e-10));
}

TEST_CASE("Phi against a brute-force Riemann oracle") {
  const Nonlinearity nl = make_sine(0.1);
  const PhiTransform tr{nl};
  // midpoint Riemann sum of phi'(xi)/xi on [1, 2] with 1e6 panels
  const double a = 1.0, b = 2.0;
  const long n = 1000000;
  double sum = 0.0;
  const double h = (b - a) / n;
  for (long i = 0; i < n; ++i) {
    const double xi = a + (i + 0.5) * h;
    sum += nl.dphi(xi) / xi * h;
  }
  CHECK(std::abs(tr.Phi(2.0) - sum) <= 1e-8);
}

TEST_CASE("Phi divergence and envelope near zero") {
  for (const Nonlinearity& nl : {make_heat(), make_sine(0.1),
                                 make_ramp(0.8, 1.2, 0.4, 0.1)}) {
    const PhiTransform tr{nl};
    // infinite-speed condition: Phi(s) -> -inf as s -> 0+
    CHECK(tr.Phi(1e-12) < -20.0);
    // sign-aware envelope delta1 |log s| <= |Phi(s)| <= delta2 |log s|
    for (double ls = -20.0; ls <= 6.0; ls += 0.5) {
      const double s = std::exp(ls);
      if (s == 1.0) continue;
      const double v = tr.Phi(s);
      const double alo = nl.delta1 * std::abs(ls);
      const double ahi = nl.delta2 * std::abs(ls);
      CHECK(std::abs(v) >= alo * (1.0 - 1e-9) - 1e-9);
      CHECK(std::abs(v) <= ahi * (1.0 + 1e-9) + 1e-9);
      CHECK((ls > 0) == (v > 0));
    }
    // monotone in s on sample pairs
    double prev = tr.Phi(std::exp(-20.0));
    for (double ls = -19.0; ls <= 6.0; ls += 1.0) {
      const double v = tr.Phi(std::exp(ls));
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("Psi inverts Phi") {
  const PhiTransform heat{make_heat()};
  CHECK(heat.Psi(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  // Psi = exp for the heat case
  CHECK(heat.Psi(-1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));

  for (const Nonlinearity& nl : {make_heat(), make_sine(0.1),
                                 make_ramp(0.8, 1.2, 0.4, 0.1)}) {
    const PhiTransform tr{nl};
    for (double s : {0.1, 0.5, 1.0, 2.0}) {
      CHECK(tr.Psi(tr.Phi(s)) == doctest::Approx(s).epsilon(1e-9));
    }
    for (double y : {-3.0, -0.7, 0.0, 0.9, 2.5}) {
      CHECK(tr.Phi(tr.Psi(y)) == doctest::Approx(y).epsilon(1e-9));
    }
  }
}

TEST_CASE("tabulated import") {
  // tabulate the sine nonlinearity and re-import it
  const Nonlinearity ref = make_sine(0.1);
  std::vector<double> s, p;
  for (int i = 0; i <= 3000; ++i) {
    const double x = -12.0 + 24.0 * i / 3000.0;
    s.push_back(x);
    p.push_back(ref.phi(x));
  }
  const Nonlinearity tab = make_tabulated(s, p);
  CHECK(tab.smoothness == Smoothness::c1_tabulated);
  CHECK(tab.delta1 == doctest::Approx(0.9).epsilon(1e-3));
  CHECK(tab.delta2 == doctest::Approx(1.1).epsilon(1e-3));
  const PhiTransform tr_ref{ref}, tr_tab{tab};
  for (double x : {0.3, 0.9, 2.0})
    CHECK(tr_tab.Phi(x) == doctest::Approx(tr_ref.Phi(x)).epsilon(1e-5));

  // CSV round trip
  {
    std::ofstream out("phi_table.csv");
    out << "s,phi\n";
    out.precision(17);
    for (std::size_t i = 0; i < s.size(); ++i)
      out << s[i] << ',' << p[i] << '\n';
  }
  const Nonlinearity csv = load_tabulated_csv("phi_table.csv");
  CHECK(csv.phi(1.0) == doctest::Approx(ref.phi(1.0)).epsilon(1e-8));
}
