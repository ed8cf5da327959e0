#include "nldiff/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nldiff {

std::string to_string(VerifyTarget t) {
  switch (t) {
    case VerifyTarget::varadhan: return "varadhan";
    case VerifyTarget::curvature_asymptotics: return "curvature_asymptotics";
    case VerifyTarget::asympvol: return "asympvol";
    case VerifyTarget::barrier_sandwich: return "barrier_sandwich";
    case VerifyTarget::stationarity: return "stationarity";
    case VerifyTarget::ordering: return "ordering";
  }
  return "unknown";
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j;
  j["target"] = to_string(target);
  if (predicted_infinite)
    j["predicted"] = nullptr;
  else
    j["predicted"] = predicted;
  j["predicted_infinite"] = predicted_infinite;
  nlohmann::json series = nlohmann::json::array();
  for (const auto& [p, v] : measured_series) series.push_back({p, v});
  j["measured_series"] = series;
  j["extrapolated"] = extrapolated;
  j["relative_error"] = relative_error;
  j["tolerance"] = tolerance;
  j["passed"] = passed;
  j["extras"] = extras;
  return j;
}

namespace {

// Nodes within `margin` of a window face that cuts through the domain are
// contaminated by the far-field truncation; keep probes clear of them.
bool clear_of_frame(const Grid& g, const DomainGeometry& dom, int ix, int iy,
                    double margin) {
  const double x = g.x(ix);
  const double y = g.dimension == 2 ? g.y(iy) : 0.0;
  struct Face {
    Vec point;
    double dist;
  };
  std::vector<Face> faces;
  faces.push_back({{g.origin[0], y, 0}, x - g.origin[0]});
  faces.push_back({{g.origin[0] + g.extent[0], y, 0},
                   g.origin[0] + g.extent[0] - x});
  if (g.dimension == 2) {
    faces.push_back({{x, g.origin[1], 0}, y - g.origin[1]});
    faces.push_back({{x, g.origin[1] + g.extent[1], 0},
                     g.origin[1] + g.extent[1] - y});
  }
  for (const auto& f : faces) {
    if (f.dist >= margin) continue;
    if (signed_distance(dom, f.point) > 0.0) return false;
  }
  return true;
}

void require_decreasing_param(const std::vector<std::pair<double, double>>& s) {
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i].first < s[i - 1].first))
      throw validation_error("report series parameter must decrease");
}

}  // namespace

VerificationReport verify_varadhan(const Field& field,
                                   const PhiTransform& transform,
                                   const DomainGeometry& dom, double band_lo,
                                   double band_hi, double tolerance) {
  const Grid& g = *field.grid;
  if (!(band_lo > 3.0 * g.max_h()))
    throw validation_error("verify_varadhan: probe band must start above 3h");
  const double t_max = *std::max_element(field.times.begin(), field.times.end());
  const double margin =
      6.0 * std::sqrt(transform.nl.delta2 * t_max);

  std::vector<std::size_t> probes;
  for (int iy = 0; iy < g.n[1]; ++iy)
    for (int ix = 0; ix < g.n[0]; ++ix) {
      const std::size_t k = g.idx(ix, iy);
      if (g.mask[k] != NodeMask::interior) continue;
      const double d = g.node_distance[k];
      if (d < band_lo || d > band_hi) continue;
      if (!clear_of_frame(g, dom, ix, iy, margin)) continue;
      probes.push_back(k);
    }
  if (probes.empty())
    throw validation_error("verify_varadhan: empty probe set");

  VerificationReport rep;
  rep.target = VerifyTarget::varadhan;
  rep.predicted = 0.0;
  rep.tolerance = tolerance;
  int excluded = 0;
  // recorded times, largest first (t -> 0 study)
  std::vector<std::size_t> order(field.times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return field.times[a] > field.times[b];
  });
  for (std::size_t oi : order) {
    const double t = field.times[oi];
    const auto& u = field.values[oi];
    double sup = 0.0;
    for (std::size_t k : probes) {
      const double uv = u[k];
      if (!(uv > 0.0)) {
        ++excluded;
        continue;
      }
      const double d = g.node_distance[k];
      const double val = -4.0 * t * transform.Phi(uv);
      sup = std::max(sup, std::abs(val - d * d) / (d * d));
    }
    rep.measured_series.push_back({t, sup});
  }
  require_decreasing_param(rep.measured_series);
  bool decreasing = true;
  for (std::size_t i = 1; i < rep.measured_series.size(); ++i)
    if (!(rep.measured_series[i].second < rep.measured_series[i - 1].second))
      decreasing = false;
  rep.extrapolated = rep.measured_series.back().second;
  rep.relative_error = rep.extrapolated;
  rep.passed = decreasing && rep.relative_error <= tolerance;
  rep.extras["probe_nodes"] = probes.size();
  rep.extras["excluded_underflow"] = excluded;
  rep.extras["frame_margin"] = margin;
  rep.extras["decreasing"] = decreasing;
  return rep;
}

namespace {

// mask-aware quadrature of u over the ball: full cells plus a 4x4
// subsampled fraction on cells cut by the sphere
double ball_integral(const Grid& g, const std::vector<double>& u,
                     const TouchingBall& ball) {
  const double R = ball.radius;
  const double cell = g.dimension == 2 ? g.h[0] * g.h[1] : g.h[0];
  const double half_diag =
      0.5 * std::sqrt(g.h[0] * g.h[0] +
                      (g.dimension == 2 ? g.h[1] * g.h[1] : 0.0));
  double I = 0.0;
  for (int iy = 0; iy < g.n[1]; ++iy)
    for (int ix = 0; ix < g.n[0]; ++ix) {
      const std::size_t k = g.idx(ix, iy);
      const double x = g.x(ix);
      const double y = g.dimension == 2 ? g.y(iy) : 0.0;
      const double dx = x - ball.center[0], dy = y - ball.center[1];
      const double r = std::sqrt(dx * dx + dy * dy);
      if (r > R + half_diag) continue;
      double w = 1.0;
      if (r > R - half_diag) {
        // boundary cell: subsample the cell box
        int cnt = 0;
        const int m = 4;
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) {
            const double sx = x + g.h[0] * ((a + 0.5) / m - 0.5);
            const double sy =
                g.dimension == 2 ? y + g.h[1] * ((b + 0.5) / m - 0.5) : 0.0;
            const double ddx = sx - ball.center[0], ddy = sy - ball.center[1];
            if (ddx * ddx + ddy * ddy < R * R) ++cnt;
            if (g.dimension == 1) break;
          }
        w = g.dimension == 2 ? double(cnt) / (m * m) : double(cnt) / m;
        if (w == 0.0) continue;
      }
      if (g.mask[k] != NodeMask::interior && w > 0.0) {
        // the open ball should only contain solved nodes
        if (g.mask[k] == NodeMask::exterior && r < R - half_diag)
          throw numerical_error("ball quadrature touched an exterior node");
      }
      I += w * cell * u[k];
    }
  return I;
}

}  // namespace

VerificationReport verify_curvature_asymptotics(
    const Nonlinearity& nl, const DomainGeometry& dom, const TouchingBall& ball,
    ProblemKind problem, const std::vector<double>& t_series,
    const CurvatureRunConfig& cfg) {
  const int N = dom.dimension;
  const double R = ball.radius;
  bool degenerate = false;
  for (double k : ball.curvatures)
    if (std::abs(1.0 / R - k) <= 1e-12 / R) degenerate = true;

  auto grid = build_grid(dom, problem, cfg.origin, cfg.extent, cfg.n);
  // the quadrature ball must sit inside the window
  for (int i = 0; i < N; ++i) {
    if (ball.center[i] - R < cfg.origin[i] ||
        ball.center[i] + R > cfg.origin[i] + cfg.extent[i])
      throw validation_error("curvature run: ball exits the grid window");
  }
  Field field = solve(nl, dom, grid, problem, t_series, cfg.schedule);

  const ProfileKind kind = problem == ProblemKind::ibvp
                               ? ProfileKind::half_line
                               : ProfileKind::whole_line;
  const double c_phi = asymptotic_constant(nl, N, kind);

  VerificationReport rep;
  rep.target = VerifyTarget::curvature_asymptotics;
  rep.tolerance = cfg.tolerance;

  std::vector<std::size_t> order(field.times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return field.times[a] > field.times[b];
  });
  for (std::size_t oi : order) {
    const double t = field.times[oi];
    const double Q = std::pow(t, -0.25 * (N + 1)) *
                     ball_integral(*field.grid, field.values[oi], ball);
    rep.measured_series.push_back({t, Q});
  }
  require_decreasing_param(rep.measured_series);

  if (!degenerate) {
    double prod = 1.0;
    for (double k : ball.curvatures) prod *= (1.0 / R - k);
    rep.predicted = c_phi / std::sqrt(prod);
    const auto [t1, Q1] = rep.measured_series[rep.measured_series.size() - 2];
    const auto [t2, Q2] = rep.measured_series.back();
    // two-point Richardson in sqrt(t): corrections are O(sqrt t)
    rep.extrapolated =
        Q2 + (Q2 - Q1) * std::sqrt(t2) / (std::sqrt(t1) - std::sqrt(t2));
    rep.relative_error = std::abs(rep.extrapolated - rep.predicted) /
                         rep.predicted;
    rep.passed = rep.relative_error <= cfg.tolerance;
  } else {
    rep.predicted_infinite = true;
    double prod = 1.0;
    for (double k : ball.curvatures) prod *= (1.0 / R - (k - 1.0 / (10.0 * R)));
    const double threshold =
        cfg.divergence_threshold_factor * c_phi / std::sqrt(prod);
    bool growing = true;
    for (std::size_t i = 1; i < rep.measured_series.size(); ++i)
      if (!(rep.measured_series[i].second > rep.measured_series[i - 1].second))
        growing = false;
    const double Q_last = rep.measured_series.back().second;
    rep.extrapolated = Q_last;
    rep.relative_error = std::max(0.0, (threshold - Q_last) / threshold);
    rep.tolerance = 0.0;
    rep.passed = growing && Q_last > threshold;
    rep.extras["divergence_threshold"] = threshold;
    rep.extras["growing"] = growing;
  }
  rep.extras["c_phi_N"] = c_phi;
  rep.extras["curvatures"] = ball.curvatures;
  if (problem == ProblemKind::cauchy)
    rep.extras["note"] = "whole-line profile moment taken over xi > 0";
  return rep;
}

VerificationReport barrier_sandwich_check(const Field& field,
                                          const BarrierPair& pair,
                                          const DomainGeometry& dom,
                                          double region_lo, double region_hi,
                                          double t_lo, double t_hi) {
  const Grid& g = *field.grid;
  const double t_max = std::min(
      t_hi, *std::max_element(field.times.begin(), field.times.end()));
  if (!(region_lo >= pair.eta * std::sqrt(t_max)))
    throw validation_error(
        "barrier_sandwich_check: region below the scaled-profile range");
  const double margin = 6.0 * std::sqrt(2.0 * t_max);  // covers delta2 <= 2

  VerificationReport rep;
  rep.target = VerifyTarget::barrier_sandwich;
  rep.tolerance = 0.0;

  std::vector<std::size_t> probes;
  for (int iy = 0; iy < g.n[1]; ++iy)
    for (int ix = 0; ix < g.n[0]; ++ix) {
      const std::size_t k = g.idx(ix, iy);
      if (g.mask[k] != NodeMask::interior) continue;
      const double d = g.node_distance[k];
      if (d < region_lo || d > region_hi) continue;
      if (!clear_of_frame(g, dom, ix, iy, margin)) continue;
      probes.push_back(k);
    }
  if (probes.empty())
    throw validation_error("barrier_sandwich_check: empty probe region");

  std::vector<std::size_t> order(field.times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return field.times[a] > field.times[b];
  });
  double worst = std::numeric_limits<double>::infinity();
  int skipped = 0;
  for (std::size_t oi : order) {
    const double t = field.times[oi];
    if (t < t_lo || t > t_hi) continue;
    const auto& u = field.values[oi];
    double margin_t = std::numeric_limits<double>::infinity();
    for (std::size_t k : probes) {
      const double xi = g.node_distance[k] / std::sqrt(t);
      if (xi < pair.eta) {
        ++skipped;
        continue;
      }
      if (xi > pair.xi_grid.back()) continue;  // beyond both tails
      const double lo = pair.eval_minus(xi);
      const double hi = pair.eval_plus(xi);
      margin_t = std::min(margin_t, std::min(hi - u[k], u[k] - lo));
    }
    rep.measured_series.push_back({t, margin_t});
    worst = std::min(worst, margin_t);
  }
  if (rep.measured_series.empty())
    throw validation_error("barrier_sandwich_check: no recorded times in window");
  require_decreasing_param(rep.measured_series);
  rep.extrapolated = worst;
  rep.relative_error = std::max(0.0, -worst);
  rep.passed = worst >= 0.0;
  rep.extras["probe_nodes"] = probes.size();
  rep.extras["skipped_below_eta"] = skipped;
  return rep;
}

VerificationReport stationarity_score(const Field& field,
                                      const DomainGeometry& dom, double R,
                                      int n_samples, double tolerance) {
  if (dom.kind != DomainKind::graph_domain)
    throw validation_error("stationarity_score: graph domains only");
  const Grid& g = *field.grid;
  const double t_max = *std::max_element(field.times.begin(), field.times.end());
  const double margin = 6.0 * std::sqrt(t_max);
  const double lat_lo = g.origin[0] + margin;
  const double lat_hi = g.origin[0] + g.extent[0] - margin;
  if (!(lat_hi > lat_lo))
    throw validation_error("stationarity_score: window too narrow");

  // Gamma = {d = R} as a graph via sup-convolution of the boundary graph
  std::vector<double> gx(n_samples), gy(n_samples);
  for (int i = 0; i < n_samples; ++i) {
    gx[i] = lat_lo + (lat_hi - lat_lo) * i / (n_samples - 1);
    gy[i] = sup_convolution(dom.graph, R, {gx[i], 0, 0});
    if (gy[i] < g.origin[1] || gy[i] > g.origin[1] + g.extent[1])
      throw validation_error("stationarity_score: Gamma exits the window");
  }

  auto bilinear = [&](const std::vector<double>& u, double x, double y) {
    const double fx = (x - g.origin[0]) / g.h[0];
    const double fy = (y - g.origin[1]) / g.h[1];
    const int ix = std::clamp(int(fx), 0, g.n[0] - 2);
    const int iy = std::clamp(int(fy), 0, g.n[1] - 2);
    const double ax = fx - ix, ay = fy - iy;
    return (1 - ax) * (1 - ay) * u[g.idx(ix, iy)] +
           ax * (1 - ay) * u[g.idx(ix + 1, iy)] +
           (1 - ax) * ay * u[g.idx(ix, iy + 1)] +
           ax * ay * u[g.idx(ix + 1, iy + 1)];
  };

  VerificationReport rep;
  rep.target = VerifyTarget::stationarity;
  rep.tolerance = tolerance;
  std::vector<std::size_t> order(field.times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return field.times[a] > field.times[b];
  });
  double score = 0.0;
  for (std::size_t oi : order) {
    const auto& u = field.values[oi];
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i < n_samples; ++i) {
      const double v = bilinear(u, gx[i], gy[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    rep.measured_series.push_back({field.times[oi], hi - lo});
    score = std::max(score, hi - lo);
  }
  require_decreasing_param(rep.measured_series);
  rep.extrapolated = score;
  rep.relative_error = score;
  rep.passed = score <= tolerance;
  rep.extras["gamma_samples"] = n_samples;
  rep.extras["lateral_range"] = {lat_lo, lat_hi};
  return rep;
}

VerificationReport verify_asympvol(const DomainGeometry& dom,
                                   const TouchingBall& ball,
                                   const std::vector<double>& s_series,
                                   double tolerance, std::uint64_t seed) {
  const int N = dom.dimension;
  const double R = ball.radius;
  double prod = 1.0;
  for (double k : ball.curvatures) prod *= (1.0 / R - k);
  if (!(prod > 0.0))
    throw validation_error("verify_asympvol: needs kappa_j < 1/R strictly");
  const double limit =
      std::pow(2.0, 0.5 * (N - 1)) * ball_volume(N - 1) / std::sqrt(prod);

  VerificationReport rep;
  rep.target = VerifyTarget::asympvol;
  rep.predicted = limit;
  rep.tolerance = tolerance;

  std::vector<double> ss = s_series;
  std::sort(ss.rbegin(), ss.rend());
  double last_se = 0.0;
  std::string method;
  for (double s : ss) {
    const MeasureEstimate m = level_set_measure(dom, s, ball, seed);
    const double scaled = std::pow(s, -0.5 * (N - 1)) * m.value;
    rep.measured_series.push_back({s, scaled});
    last_se = std::pow(s, -0.5 * (N - 1)) * m.stderr_est;
    method = m.method;
  }
  require_decreasing_param(rep.measured_series);
  rep.extrapolated = rep.measured_series.back().second;
  rep.relative_error = std::abs(rep.extrapolated - limit) / limit;
  const double eff_tol =
      std::max(tolerance, last_se > 0.0 ? 3.0 * last_se / limit : 0.0);
  rep.passed = rep.relative_error <= eff_tol;
  rep.extras["method"] = method;
  rep.extras["scaled_stderr"] = last_se;
  rep.extras["effective_tolerance"] = eff_tol;
  return rep;
}

VerificationReport ordering_report(const Field& lower, const Field& upper,
                                   double slack) {
  const OrderingReport r = ordering_check(lower, upper, slack);
  VerificationReport rep;
  rep.target = VerifyTarget::ordering;
  rep.predicted = 0.0;
  rep.tolerance = slack;
  std::vector<double> ts = lower.times;
  std::sort(ts.rbegin(), ts.rend());
  for (double t : ts) {
    // per-time violation for the series
    double worst = 0.0;
    for (std::size_t k = 0; k < lower.times.size(); ++k) {
      if (lower.times[k] != t) continue;
      const std::size_t n = lower.grid->num_nodes();
      for (std::size_t i = 0; i < n; ++i) {
        if (lower.grid->mask[i] == NodeMask::exterior ||
            upper.grid->mask[i] == NodeMask::exterior)
          continue;
        worst = std::max(worst, lower.values[k][i] - upper.values[k][i]);
      }
    }
    rep.measured_series.push_back({t, worst});
  }
  rep.extrapolated = r.max_violation;
  rep.relative_error = r.max_violation;
  rep.passed = r.passed;
  return rep;
}

}  // namespace nldiff
