#pragma once
// Small numerical utilities shared across modules: adaptive quadrature,
// bracketed root finding, monotone cubic interpolation, Gaussian tails.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nldiff {

inline constexpr double kSqrtPi = 1.7724538509055160273;

// Input / construction problems (bad config, contract violations).
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative process failed to converge; may carry a partial estimate.
struct numerical_error : std::runtime_error {
  double partial = 0.0;
  double partial_stderr = 0.0;
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
  numerical_error(const std::string& msg, double part, double se)
      : std::runtime_error(msg), partial(part), partial_stderr(se) {}
};

// int_L^inf exp(-eta^2/(4a)) d eta
inline double gauss_tail(double L, double a) {
  return std::sqrt(M_PI * a) * std::erfc(L / (2.0 * std::sqrt(a)));
}

// ierfc(x) = int_x^inf erfc(t) dt
inline double ierfc(double x) {
  return std::exp(-x * x) / kSqrtPi - x * std::erfc(x);
}

// Volume of the unit ball in R^k; ball_volume(0) = 1.
double ball_volume(int k);

// Adaptive Simpson quadrature with an absolute error target.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol, int max_depth = 60);

// Brent's method on a bracket [a,b] with f(a)*f(b) <= 0.
double brent_root(const std::function<double(double)>& f, double a, double b,
                  double xtol, double ftol, int max_iter = 200);

// Fritsch-Carlson monotone cubic interpolant on a strictly increasing grid.
// Preserves monotonicity of the data; evaluation outside the grid is an error.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double deriv(double x) const;

  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }
  bool empty() const { return x_.empty(); }

 private:
  std::size_t locate(double x) const;
  std::vector<double> x_, y_, m_;  // nodes, values, node tangents
};

}  // namespace nldiff
