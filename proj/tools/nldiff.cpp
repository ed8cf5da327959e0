// Batch driver: parse a run configuration (JSON file, CLI flags override),
// dispatch the profile / geometry / PDE / verification pipelines, and emit
// deterministic artifacts (report.json plus CSV series) into the output
// directory. Exit codes: 0 pass, 2 bad configuration, 3 numerical failure.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nldiff/geometry.hpp"
#include "nldiff/io.hpp"
#include "nldiff/kernels.hpp"
#include "nldiff/nonlinearity.hpp"
#include "nldiff/pde.hpp"
#include "nldiff/selfsimilar.hpp"
#include "nldiff/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nldiff;

namespace {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open config " + path);
  json j;
  in >> j;
  return j;
}

Nonlinearity nonlinearity_from(const json& cfg) {
  const json nl = cfg.value("nonlinearity", json{{"name", "heat"}});
  const std::string name = nl.value("name", "heat");
  if (name == "heat") return make_heat();
  if (name == "sine") return make_sine(nl.value("a", 0.1));
  if (name == "ramp")
    return make_ramp(nl.value("k1", 0.8), nl.value("k2", 1.2),
                     nl.value("s0", 0.4), nl.value("w", 0.1));
  if (name == "tabulated") return load_tabulated_csv(nl.at("file"));
  throw validation_error("unknown nonlinearity: " + name);
}

Vec vec_from(const json& a, int dim) {
  Vec v{0, 0, 0};
  for (int i = 0; i < dim && i < int(a.size()); ++i) v[i] = a[i];
  return v;
}

DomainGeometry domain_from(const json& cfg) {
  const json d = cfg.value("domain", json{{"kind", "half-space"}});
  const std::string kind = d.value("kind", "half-space");
  const int N = d.value("dimension", 2);
  if (kind == "half-space") {
    json def = json::array({0, 1});
    if (N == 1) def = json::array({1});
    return DomainGeometry::half_space(N, vec_from(d.value("normal", def), N),
                                      d.value("offset", 0.0));
  }
  if (kind == "ball-interior")
    return DomainGeometry::ball_interior(
        N, vec_from(d.value("center", json::array({0, 0, 0})), N),
        d.value("radius", 1.0));
  if (kind == "ball-exterior")
    return DomainGeometry::ball_exterior(
        N, vec_from(d.value("center", json::array({0, 0, 0})), N),
        d.value("radius", 1.0));
  if (kind == "graph") {
    const std::string shape = d.value("shape", "parabola");
    GraphFn g;
    if (shape == "parabola") {
      g = graph_parabola(N - 1, d.value("rho", 0.5));
    } else if (shape == "affine") {
      g = graph_affine(N - 1,
                       vec_from(d.value("slope", json::array({0.2})), N - 1),
                       d.value("intercept", 0.0));
    } else if (shape == "sine") {
      g = graph_sine(N - 1, d.value("amplitude", 0.3),
                     d.value("wavenumber", 1.0), d.value("intercept", 0.0));
    } else {
      throw validation_error("unknown graph shape: " + shape);
    }
    return DomainGeometry::graph_domain(N, g);
  }
  throw validation_error("unknown domain kind: " + kind);
}

std::shared_ptr<Grid> grid_from(const json& cfg, const DomainGeometry& dom,
                                ProblemKind prob) {
  const json g = cfg.at("grid");
  std::array<double, 2> origin{0, 0}, extent{1, 1};
  std::array<int, 2> n{129, 129};
  const auto jo = g.value("origin", json::array({0.0, 0.0}));
  const auto je = g.value("extent", json::array({1.0, 1.0}));
  const auto jn = g.value("n", json::array({129, 129}));
  for (int i = 0; i < 2 && i < int(jo.size()); ++i) origin[i] = jo[i];
  for (int i = 0; i < 2 && i < int(je.size()); ++i) extent[i] = je[i];
  for (int i = 0; i < 2 && i < int(jn.size()); ++i) n[i] = jn[i];
  return build_grid(dom, prob, origin, extent, n);
}

TimeSchedule schedule_from(const json& cfg) {
  TimeSchedule s;
  if (cfg.contains("schedule")) {
    s.dt0_fraction = cfg["schedule"].value("dt0_fraction", s.dt0_fraction);
    s.growth = cfg["schedule"].value("growth", s.growth);
  }
  return s;
}

ProblemKind problem_from(const json& cfg) {
  const std::string p = cfg.value("problem", "ibvp");
  if (p == "ibvp") return ProblemKind::ibvp;
  if (p == "cauchy") return ProblemKind::cauchy;
  throw validation_error("unknown problem kind: " + p);
}

std::vector<double> times_from(const json& cfg) {
  std::vector<double> t;
  for (double v : cfg.value("times", json::array({4e-3, 2e-3, 1e-3})))
    t.push_back(v);
  return t;
}

json base_report(const std::string& command, const json& cfg) {
  json j;
  j["command"] = command;
  j["config"] = cfg;
  j["seed"] = cfg.value("seed", 12345);
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  j["metadata"] = {
      {"timestamp_ms",
       std::chrono::duration_cast<std::chrono::milliseconds>(now).count()}};
  return j;
}

struct OutputDir {
  fs::path dir;
  explicit OutputDir(const json& cfg) {
    std::string root = ".";
    if (const char* env = std::getenv("NLDIFF_OUTPUT_ROOT")) root = env;
    dir = fs::path(root) / cfg.value("output_dir", "out");
    fs::create_directories(dir);
  }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

int finish(const OutputDir& out, json report, bool passed) {
  report["passed"] = passed;
  write_json(out.file("report.json"), report);
  return passed ? 0 : 1;
}

int run_profile(const json& cfg) {
  const OutputDir out(cfg);
  const Nonlinearity nl = nonlinearity_from(cfg);
  const double c = cfg.value("c", 1.0);
  const std::string kind = cfg.value("kind", "half");
  ProfileOptions opt;
  opt.tail_tolerance = cfg.value("tail_tolerance", -1.0);
  opt.xi_max = cfg.value("xi_max", -1.0);
  const Profile p = kind == "half" ? solve_half_line(nl, c, opt)
                                   : solve_whole_line(nl, c, opt);
  write_profile_csv(out.file("profile.csv"), p);
  json rep = base_report("profile", cfg);
  rep["profile"] = profile_summary(p);
  rep["nonlinearity"] = nl.name;
  rep["c1_tabulated"] = nl.smoothness == Smoothness::c1_tabulated;
  return finish(out, rep, true);
}

int run_constant(const json& cfg) {
  const OutputDir out(cfg);
  const Nonlinearity nl = nonlinearity_from(cfg);
  const int N = cfg.value("N", 2);
  const std::string kind = cfg.value("kind", "half");
  const double c = asymptotic_constant(nl, N,
                                       kind == "half" ? ProfileKind::half_line
                                                      : ProfileKind::whole_line);
  json rep = base_report("constant", cfg);
  rep["c_phi_N"] = c;
  rep["N"] = N;
  if (kind != "half")
    rep["note"] = "whole-line profile moment taken over xi > 0";
  return finish(out, rep, true);
}

int run_pde(const json& cfg) {
  const OutputDir out(cfg);
  const Nonlinearity nl = nonlinearity_from(cfg);
  const DomainGeometry dom = domain_from(cfg);
  const ProblemKind prob = problem_from(cfg);
  auto grid = grid_from(cfg, dom, prob);
  const Field f = solve(nl, dom, grid, prob, times_from(cfg),
                        schedule_from(cfg));
  for (std::size_t i = 0; i < f.times.size(); ++i)
    write_field_csv(out.file("field_t" + std::to_string(i) + ".csv"), *grid,
                    f.values[i]);
  json rep = base_report("pde", cfg);
  rep["times"] = f.times;
  int newton = 0, cg = 0;
  double res = 0;
  for (const auto& s : f.stats) {
    newton += s.newton_iters;
    cg += s.cg_iters;
    res = std::max(res, s.residual);
  }
  rep["steps"] = f.stats.size();
  rep["newton_total"] = newton;
  rep["cg_total"] = cg;
  rep["max_residual"] = res;
  rep["grid"] = {{"n", {grid->n[0], grid->n[1]}},
                 {"h", {grid->h[0], grid->h[1]}}};
  return finish(out, rep, true);
}

int emit_verify(const OutputDir& out, const json& cfg,
                const std::string& command, const VerificationReport& rep) {
  write_series_csv(out.file("series.csv"), rep.measured_series,
                   "parameter,value");
  json j = base_report(command, cfg);
  j["report"] = rep.to_json();
  return finish(out, j, rep.passed);
}

int run_verify_varadhan(const json& cfg) {
  const OutputDir out(cfg);
  const Nonlinearity nl = nonlinearity_from(cfg);
  const DomainGeometry dom = domain_from(cfg);
  const ProblemKind prob = problem_from(cfg);
  auto grid = grid_from(cfg, dom, prob);
  const Field f = solve(nl, dom, grid, prob, times_from(cfg),
                        schedule_from(cfg));
  const auto band = cfg.value("probe_band", json::array({0.2, 0.5}));
  const PhiTransform tr{nl};
  const auto rep = verify_varadhan(f, tr, dom, band[0], band[1],
                                   cfg.value("tolerance", 0.10));
  return emit_verify(out, cfg, "verify-varadhan", rep);
}

int run_verify_curvature(const json& cfg) {
  const OutputDir out(cfg);
  const Nonlinearity nl = nonlinearity_from(cfg);
  const DomainGeometry dom = domain_from(cfg);
  const double R = cfg.value("R", 0.25);
  const Vec contact = vec_from(cfg.value("contact", json::array({0, 0})),
                               dom.dimension);
  const TouchingBall ball = make_touching_ball(dom, contact, R);
  CurvatureRunConfig rc;
  const json g = cfg.at("grid");
  const auto jo = g.value("origin", json::array({-0.5, 0.0}));
  const auto je = g.value("extent", json::array({1.0, 1.0}));
  const auto jn = g.value("n", json::array({257, 257}));
  for (int i = 0; i < 2; ++i) {
    rc.origin[i] = jo[i];
    rc.extent[i] = je[i];
    rc.n[i] = jn[i];
  }
  rc.schedule = schedule_from(cfg);
  rc.tolerance = cfg.value("tolerance", 0.10);
  rc.divergence_threshold_factor =
      cfg.value("divergence_threshold_factor", 1.0);
  const auto rep = verify_curvature_asymptotics(
      nl, dom, ball, problem_from(cfg), times_from(cfg), rc);
  return emit_verify(out, cfg, "verify-curvature", rep);
}

int run_verify_asympvol(const json& cfg) {
  const OutputDir out(cfg);
  const DomainGeometry dom = domain_from(cfg);
  const double R = cfg.value("R", 0.25);
  const Vec contact = vec_from(cfg.value("contact", json::array({0, 0})),
                               dom.dimension);
  const TouchingBall ball = make_touching_ball(dom, contact, R);
  std::vector<double> ss;
  for (double v :
       cfg.value("s_series", json::array({1e-2 * R, 1e-3 * R, 1e-4 * R})))
    ss.push_back(v);
  const auto rep = verify_asympvol(dom, ball, ss, cfg.value("tolerance", 0.01),
                                   cfg.value("seed", 12345));
  // contour export for plotting, 2D graph domains only
  if (dom.kind == DomainKind::graph_domain && dom.dimension == 2)
    write_segments_csv(out.file("contour.csv"),
                       contour_segments(dom, ss.back(), ball));
  return emit_verify(out, cfg, "verify-asympvol", rep);
}

int run_verify_barriers(const json& cfg) {
  const OutputDir out(cfg);
  const Nonlinearity nl = nonlinearity_from(cfg);
  const DomainGeometry dom = domain_from(cfg);
  const ProblemKind prob = problem_from(cfg);
  auto grid = grid_from(cfg, dom, prob);
  const auto times = times_from(cfg);
  const Field f = solve(nl, dom, grid, prob, times, schedule_from(cfg));
  const BarrierPair pair = barrier_profiles(
      nl, cfg.value("epsilon", 0.1), cfg.value("eta", 0.01),
      prob == ProblemKind::ibvp ? ProfileKind::half_line
                                : ProfileKind::whole_line);
  const auto region = cfg.value("region", json::array({0.02, 0.1}));
  const auto rep = barrier_sandwich_check(
      f, pair, dom, region[0], region[1],
      cfg.value("t_lo", 0.0), cfg.value("t_hi", 1.0));
  return emit_verify(out, cfg, "verify-barriers", rep);
}

int run_verify_stationarity(const json& cfg) {
  const OutputDir out(cfg);
  const Nonlinearity nl = nonlinearity_from(cfg);
  const DomainGeometry dom = domain_from(cfg);
  auto grid = grid_from(cfg, dom, ProblemKind::ibvp);
  const Field f = solve(nl, dom, grid, problem_from(cfg), times_from(cfg),
                        schedule_from(cfg));
  const auto rep =
      stationarity_score(f, dom, cfg.value("R", 0.25),
                         cfg.value("gamma_samples", 200),
                         cfg.value("tolerance", 1e-3));
  return emit_verify(out, cfg, "verify-stationarity", rep);
}

int run_verify_ordering(const json& cfg) {
  const OutputDir out(cfg);
  const Nonlinearity nl = nonlinearity_from(cfg);
  const ProblemKind prob = problem_from(cfg);
  const double shift = cfg.value("shift", 0.03125);
  const int N = 2;
  const DomainGeometry mid = DomainGeometry::half_space(N, {0, 1, 0}, 0.0);
  const DomainGeometry inner =
      DomainGeometry::half_space(N, {0, 1, 0}, shift);   // smaller domain
  const DomainGeometry outer =
      DomainGeometry::half_space(N, {0, 1, 0}, -shift);  // larger domain
  const auto times = times_from(cfg);
  const auto sched = schedule_from(cfg);
  auto gm = grid_from(cfg, mid, prob);
  auto gi = grid_from(cfg, inner, prob);
  auto go = grid_from(cfg, outer, prob);
  const Field um = solve(nl, mid, gm, prob, times, sched);
  const Field ui = solve(nl, inner, gi, prob, times, sched);
  const Field uo = solve(nl, outer, go, prob, times, sched);
  // larger domain -> farther boundary -> smaller solution (ibvp);
  // for cauchy data chi_{complement} the inclusion flips the data ordering
  const Field& low = prob == ProblemKind::ibvp ? uo : um;
  const Field& mid1 = um;
  const Field& hig = prob == ProblemKind::ibvp ? ui : um;
  const double slack = cfg.value("tolerance", 1e-8);
  auto r1 = ordering_report(low, mid1, slack);
  auto r2 = prob == ProblemKind::ibvp ? ordering_report(mid1, hig, slack)
                                      : ordering_report(ui, um, slack);
  auto r3 = prob == ProblemKind::ibvp ? r2 : ordering_report(um, uo, slack);
  VerificationReport rep = r1;
  rep.relative_error = std::max({r1.relative_error, r2.relative_error,
                                 r3.relative_error});
  rep.extrapolated = rep.relative_error;
  rep.passed = r1.passed && r2.passed && r3.passed;
  return emit_verify(out, cfg, "verify-ordering", rep);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonlinear diffusion laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::string nl_name, domain_kind, problem, kind;
  double c = std::nan(""), R = std::nan(""), rho = std::nan("");
  double a = std::nan(""), tolerance = std::nan("");
  int N = -1, threads = 1;
  long seed = -1;
  std::string out_dir;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--nl", nl_name, "nonlinearity name (heat|sine|ramp)");
  app.add_option("--a", a, "sine nonlinearity amplitude");
  app.add_option("--c", c, "profile level");
  app.add_option("--kind", kind, "profile kind (half|whole)");
  app.add_option("--N", N, "space dimension");
  app.add_option("--R", R, "touching ball radius");
  app.add_option("--rho", rho, "parabola parameter");
  app.add_option("--domain", domain_kind,
                 "domain kind (half-space|graph|ball-exterior|ball-interior)");
  app.add_option("--problem", problem, "ibvp|cauchy");
  app.add_option("--tolerance", tolerance, "pass tolerance");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--threads", threads, "worker threads (1 = serial)");
  app.add_option("--out", out_dir, "output directory");

  const std::vector<std::string> commands = {
      "profile",          "constant",       "pde",
      "verify-varadhan",  "verify-curvature", "verify-asympvol",
      "verify-barriers",  "verify-stationarity", "verify-ordering"};
  for (const auto& name : commands) app.add_subcommand(name);

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  json cfg;
  try {
    cfg = load_config(config_path);
    // flags override file keys
    if (!nl_name.empty()) cfg["nonlinearity"]["name"] = nl_name;
    if (!std::isnan(a)) cfg["nonlinearity"]["a"] = a;
    if (!std::isnan(c)) cfg["c"] = c;
    if (!kind.empty()) cfg["kind"] = kind;
    if (N > 0) {
      cfg["N"] = N;
      cfg["domain"]["dimension"] = N;
    }
    if (!std::isnan(R)) cfg["R"] = R;
    if (!std::isnan(rho)) cfg["domain"]["rho"] = rho;
    if (!domain_kind.empty()) cfg["domain"]["kind"] = domain_kind;
    if (!problem.empty()) cfg["problem"] = problem;
    if (!std::isnan(tolerance)) cfg["tolerance"] = tolerance;
    if (seed >= 0) cfg["seed"] = seed;
    if (!out_dir.empty()) cfg["output_dir"] = out_dir;
    cfg["threads"] = threads;
    kernels::set_threads(threads);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (command == "profile") return run_profile(cfg);
    if (command == "constant") return run_constant(cfg);
    if (command == "pde") return run_pde(cfg);
    if (command == "verify-varadhan") return run_verify_varadhan(cfg);
    if (command == "verify-curvature") return run_verify_curvature(cfg);
    if (command == "verify-asympvol") return run_verify_asympvol(cfg);
    if (command == "verify-barriers") return run_verify_barriers(cfg);
    if (command == "verify-stationarity") return run_verify_stationarity(cfg);
    if (command == "verify-ordering") return run_verify_ordering(cfg);
    std::cerr << "unknown command\n";
    return 2;
  } catch (const validation_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}
