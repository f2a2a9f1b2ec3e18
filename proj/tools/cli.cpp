#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "singlab/assumptions.hpp"
#include "singlab/asymptotics.hpp"
#include "singlab/clusters.hpp"
#include "singlab/integrator.hpp"
#include "singlab/minimizer.hpp"
#include "singlab/path.hpp"
#include "singlab/potential_io.hpp"
#include "singlab/variations.hpp"

namespace singlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error("unknown key '" + key + "' in " + where);
    }
  }
}

double number(const json& j, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (!fallback) config_error(std::string("missing required key '") + key + "'");
    return *fallback;
  }
  const json& v = j.at(key);
  if (!v.is_number()) config_error(std::string("'") + key + "' must be a number");
  return v.get<double>();
}

std::size_t count(const json& j, const char* key, std::optional<std::size_t> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (!fallback) config_error(std::string("missing required key '") + key + "'");
    return *fallback;
  }
  const json& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    config_error(std::string("'") + key + "' must be a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const char* key, std::optional<std::vector<double>> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (!fallback) config_error(std::string("missing required key '") + key + "'");
    return *fallback;
  }
  const json& v = j.at(key);
  if (!v.is_array()) config_error(std::string("'") + key + "' must be an array of numbers");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number()) config_error(std::string("'") + key + "' must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string text(const json& j, const char* key, std::optional<std::string> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (!fallback) config_error(std::string("missing required key '") + key + "'");
    return *fallback;
  }
  if (!j.at(key).is_string()) config_error(std::string("'") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<double> from_vec(const Vec& v) { return {v.data(), v.data() + v.size()}; }

std::string short_number(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

constexpr std::string_view kIntegrateKeys[] = {
    "x0", "v0", "t0", "t1", "tol", "collision_tol", "r_floor", "initial_step", "max_steps", "samples"};

void validate_integration(const json& s, const std::string& where, std::initializer_list<std::string_view> extra) {
  std::vector<std::string_view> keys(std::begin(kIntegrateKeys), std::end(kIntegrateKeys));
  keys.insert(keys.end(), extra.begin(), extra.end());
  require_object(s, where);
  for (const auto& [key, value] : s.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) config_error("unknown key '" + key + "' in " + where);
  }
  numbers(s, "x0");
  numbers(s, "v0");
  number(s, "t1");
  number(s, "t0", 0.0);
  number(s, "tol", 1e-12);
  number(s, "collision_tol", 1e-12);
  number(s, "r_floor", 1e-10);
  number(s, "initial_step", 1e-3);
  count(s, "max_steps", 2'000'000);
  count(s, "samples", 0);
  if (s.contains("fit")) {
    allow_keys(s["fit"], where + ".fit", {"start_fraction", "min_decades", "min_time_gap", "exponent_band"});
    for (const char* k : {"start_fraction", "min_decades", "min_time_gap", "exponent_band"}) number(s["fit"], k, 0.0);
  }
  if (s.contains("r_rel")) number(s, "r_rel");
  if (s.contains("event")) count(s, "event");
}

void validate_section(Experiment kind, const json& s, const std::string& where) {
  switch (kind) {
    case Experiment::Integrate:
      validate_integration(s, where, {});
      break;
    case Experiment::Sundman:
      validate_integration(s, where, {"fit", "r_rel"});
      break;
    case Experiment::Reduce:
      validate_integration(s, where, {"fit", "r_rel", "event"});
      break;
    case Experiment::Minimize: {
      allow_keys(s, where,
                 {"t0", "t1", "cells", "start", "end", "initial_csv", "boundary", "perturbation", "tol", "max_iter",
                  "memory", "seed", "multistart", "probes"});
      number(s, "t0", 0.0);
      number(s, "t1");
      count(s, "cells");
      const std::string bc = text(s, "boundary", "fixed");
      if (bc != "fixed" && bc != "periodic") config_error("boundary must be 'fixed' or 'periodic'");
      if (!s.contains("initial_csv")) {
        numbers(s, "start");
        numbers(s, "end");
      } else {
        text(s, "initial_csv");
      }
      number(s, "perturbation", 0.0);
      number(s, "tol", 1e-9);
      count(s, "max_iter", 20000);
      count(s, "memory", 12);
      count(s, "probes", 0);
      if (s.contains("seed")) count(s, "seed");
      if (count(s, "multistart", 1) == 0) config_error("multistart must be at least 1");
      break;
    }
    case Experiment::Averaging: {
      allow_keys(s, where, {"alphas", "theta_samples", "variation", "log_bound"});
      for (double a : numbers(s, "alphas", std::vector<double>{0.5, 1.0, 1.5})) {
        if (!(a > 0.0 && a < 2.0)) config_error("alphas must lie in (0, 2)");
      }
      count(s, "theta_samples", 65);
      if (s.contains("variation")) {
        allow_keys(s["variation"], where + ".variation", {"deltas", "T"});
        numbers(s["variation"], "deltas");
        number(s["variation"], "T", 1.0);
      }
      if (s.contains("log_bound")) {
        allow_keys(s["log_bound"], where + ".log_bound", {"deltas", "T", "R", "M"});
        numbers(s["log_bound"], "deltas");
        number(s["log_bound"], "T", 0.5);
        number(s["log_bound"], "R", 1.0);
        number(s["log_bound"], "M", 1.0);
      }
      break;
    }
    case Experiment::Assumptions: {
      allow_keys(s, where, {"sampler", "tol", "small_radius", "limit_tol", "plane"});
      if (s.contains("sampler")) {
        allow_keys(s["sampler"], where + ".sampler", {"count", "r_min", "r_max", "t_min", "t_max", "separation"});
        count(s["sampler"], "count", 400);
        for (const char* k : {"r_min", "r_max", "t_min", "t_max", "separation"}) number(s["sampler"], k, 0.0);
      }
      number(s, "tol", 1e-9);
      number(s, "small_radius", 1.0);
      number(s, "limit_tol", 1e-2);
      if (s.contains("plane")) {
        if (!s["plane"].is_array() || s["plane"].size() != 2) config_error("plane must list two vectors");
      }
      break;
    }
  }
}

IntegratorOptions integrator_options(const json& s) {
  IntegratorOptions o;
  o.tol = number(s, "tol", o.tol);
  o.collision_tol = number(s, "collision_tol", o.collision_tol);
  o.r_floor = number(s, "r_floor", o.r_floor);
  o.initial_step = number(s, "initial_step", o.initial_step);
  o.max_steps = count(s, "max_steps", o.max_steps);
  if (const std::size_t n = count(s, "samples", 0); n > 1) {
    const double t0 = number(s, "t0", 0.0), t1 = number(s, "t1");
    for (std::size_t k = 0; k < n; ++k) o.output_times.push_back(t0 + (t1 - t0) * static_cast<double>(k) / (n - 1));
  }
  return o;
}

FitOptions fit_options(const json& s) {
  FitOptions o;
  if (!s.contains("fit")) return o;
  const json& f = s["fit"];
  o.start_fraction = number(f, "start_fraction", o.start_fraction);
  o.min_decades = number(f, "min_decades", o.min_decades);
  o.min_time_gap = number(f, "min_time_gap", o.min_time_gap);
  o.exponent_band = number(f, "exponent_band", o.exponent_band);
  return o;
}

Series path_series(const Path& path) {
  Series s;
  s.add("t", path.grid());
  const MassMetric& m = path.metric();
  for (int i = 0; i < m.bodies(); ++i) {
    for (int c = 0; c < m.dim(); ++c) {
      std::vector<double> col;
      for (std::size_t j = 0; j < path.size(); ++j) col.push_back(path.point(j)[i * m.dim() + c]);
      s.add("x_" + std::to_string(i + 1) + "_" + std::to_string(c + 1), std::move(col));
    }
  }
  return s;
}

OdeSolution run_integration(const PotentialSpec& spec, const json& s, const Logger& log) {
  const Vec x0 = to_vec(numbers(s, "x0")), v0 = to_vec(numbers(s, "v0"));
  if (x0.size() != spec.metric().size() || v0.size() != spec.metric().size()) {
    config_error("x0 and v0 must have n * d entries");
  }
  const double t0 = number(s, "t0", 0.0), t1 = number(s, "t1");
  if (log) log("integrating from t = " + short_number(t0) + " towards " + short_number(t1));
  OdeSolution sol = integrate(spec, x0, v0, t0, t1, integrator_options(s));
  if (log) log("accepted " + std::to_string(sol.accepted) + " steps, rejected " + std::to_string(sol.rejected));
  return sol;
}

Series radius_series(const Path& path, const PotentialSpec& spec) {
  Series s;
  std::vector<double> dist, u;
  for (std::size_t j = 0; j < path.size(); ++j) {
    dist.push_back(spec.singular_distance(path.point(j)));
    u.push_back(spec.is_singular(path.point(j)) ? std::numeric_limits<double>::quiet_NaN()
                                                 : spec.evaluate(path.time(j), path.point(j)));
  }
  s.add("t", path.grid());
  s.add("distance", std::move(dist));
  s.add("potential", std::move(u));
  return s;
}

Artifacts run_integrate(const ExperimentConfig& cfg, const PotentialSpec& spec, const Logger& log) {
  const OdeSolution sol = run_integration(spec, cfg.settings, log);
  const Path path = sol.path();
  const std::vector<double> h = solution_energy(sol, spec);
  Artifacts a;
  double drift = 0.0;
  for (double e : h) drift = std::max(drift, std::abs(e - h.front()));
  a.summary = {{"samples", sol.size()},        {"accepted", sol.accepted},   {"rejected", sol.rejected},
               {"halted", sol.halted},         {"t_final", sol.t.back()},    {"energy_initial", h.front()},
               {"energy_max_drift", drift},    {"events", sol.events.size()}};
  a.events = events_to_json(sol.events);
  Series energy;
  energy.add("t", sol.t);
  energy.add("energy", h);
  a.series.emplace_back("trajectory", path_series(path));
  a.series.emplace_back("energy", std::move(energy));
  a.series.emplace_back("radius", radius_series(path, spec));
  return a;
}

Artifacts run_sundman(const ExperimentConfig& cfg, const PotentialSpec& spec, const Logger& log) {
  const json& s = cfg.settings;
  const OdeSolution sol = run_integration(spec, s, log);
  const Path path = sol.path();
  DetectOptions dopt;
  dopt.r_rel = s.contains("r_rel") ? number(s, "r_rel") : dopt.r_rel;
  const auto events = detect_collisions(path, spec, dopt);
  if (events.empty()) throw Error(ErrorCode::NoConvergence, "no collision detected on the integrated orbit");
  const CollisionEvent& ev = events.front();
  if (log) log("fitting the collision at sample " + std::to_string(ev.sample));
  const SundmanFit fit = spec.is_logarithmic() ? fit_sundman_log(ev, path, spec, fit_options(s))
                                               : fit_sundman(ev, path, spec, fit_options(s));
  Artifacts a;
  json evs = json::array();
  for (const auto& e : events) evs.push_back(to_json(e));
  a.summary = {{"fit", to_json(fit)}, {"collisions", events.size()}, {"isolated", collisions_isolated(events)}};
  a.events = {{"integrator", events_to_json(sol.events)}, {"collisions", evs}};
  a.series.emplace_back("trajectory", path_series(path));
  a.series.emplace_back("radius", radius_series(path, spec));
  if (fit.log_law) {
    Series law;
    law.add("r", fit.r);
    law.add("law_ratio", fit.law_ratio);
    law.add("energy_ratio", fit.energy_ratio);
    a.series.emplace_back("log_law", std::move(law));
  }
  return a;
}

Artifacts run_reduce(const ExperimentConfig& cfg, const PotentialSpec& spec, const Logger& log) {
  const json& s = cfg.settings;
  const OdeSolution sol = run_integration(spec, s, log);
  const Path path = sol.path();
  DetectOptions dopt;
  dopt.r_rel = s.contains("r_rel") ? number(s, "r_rel") : dopt.r_rel;
  const auto events = detect_collisions(path, spec, dopt);
  std::vector<CollisionEvent> partial;
  std::copy_if(events.begin(), events.end(), std::back_inserter(partial),
               [](const CollisionEvent& e) { return e.kind == CollisionKind::Partial; });
  const std::size_t pick = count(s, "event", 0);
  if (pick >= partial.size()) throw Error(ErrorCode::NoConvergence, "no partial collision with the requested index");
  const CollisionLattice lattice = CollisionLattice::build(spec);
  if (log) log("reducing the partial collision at sample " + std::to_string(partial[pick].sample));
  const ReducedCollision red = reduce_partial_collision(path, partial[pick], lattice, spec);
  const auto reduced_events = detect_collisions(red.w, red.reduced, dopt);
  if (reduced_events.empty()) throw Error(ErrorCode::NoConvergence, "the reduced orbit shows no collision");
  const SundmanFit fit = fit_sundman(reduced_events.front(), red.w, red.reduced, fit_options(s));
  Artifacts a;
  json evs = json::array();
  for (const auto& e : events) evs.push_back(to_json(e));
  a.summary = {{"lattice", lattice.to_json()},
               {"event", to_json(partial[pick])},
               {"element", red.element},
               {"clusters", red.clusters},
               {"window", {red.window_begin, red.window_end}},
               {"p_accel_bound", red.p_accel_bound},
               {"isolated", collisions_isolated(events)},
               {"reduced_fit", to_json(fit)}};
  a.events = {{"integrator", events_to_json(sol.events)}, {"collisions", evs}};
  a.series.emplace_back("trajectory", path_series(path));
  a.series.emplace_back("w", path_series(red.w));
  a.series.emplace_back("p", path_series(red.p));
  return a;
}

Artifacts run_minimize(const ExperimentConfig& cfg, const PotentialSpec& spec, const Logger& log) {
  const json& s = cfg.settings;
  const MassMetric& m = spec.metric();
  const std::vector<double> grid = uniform_grid(number(s, "t0", 0.0), number(s, "t1"), count(s, "cells"));
  std::vector<Vec> pts;
  if (s.contains("initial_csv")) {
    Path p = read_path_csv(cfg.base_dir / text(s, "initial_csv"), m);
    if (p.size() != grid.size()) config_error("initial_csv must have cells + 1 rows");
    pts = p.points();
  } else {
    const Vec a = to_vec(numbers(s, "start")), b = to_vec(numbers(s, "end"));
    if (a.size() != m.size() || b.size() != m.size()) config_error("start and end must have n * d entries");
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double u = (grid[j] - grid.front()) / (grid.back() - grid.front());
      pts.push_back((1.0 - u) * a + u * b);
    }
  }
  const double amp = number(s, "perturbation", 0.0);
  const BoundaryCondition bc = text(s, "boundary", "fixed") == "periodic" ? BoundaryCondition::periodic()
                                                                          : BoundaryCondition::fixed_ends();
  MinimizerOptions opt;
  opt.tol = number(s, "tol", opt.tol);
  opt.max_iter = count(s, "max_iter", opt.max_iter);
  opt.memory = count(s, "memory", opt.memory);
  const Lagrangian lag = Lagrangian::from_spec(spec);
  const std::size_t starts = count(s, "multistart", 1);
  std::optional<MinimizeResult> best;
  std::size_t best_start = 0, converged_starts = 0;
  for (std::size_t k = 0; k < starts; ++k) {
    std::vector<Vec> start = pts;
    if (amp != 0.0) {
      std::mt19937_64 rng(cfg.seed + k);
      std::normal_distribution<double> normal;
      Vec dir(m.size());
      for (int c = 0; c < dir.size(); ++c) dir[c] = normal(rng);
      dir /= m.norm(dir);
      for (std::size_t j = 1; j + 1 < start.size(); ++j) {
        const double u = (grid[j] - grid.front()) / (grid.back() - grid.front());
        start[j] += amp * std::sin(std::numbers::pi * u) * dir;
      }
    }
    opt.seed = cfg.seed + k;
    if (log) log("start " + std::to_string(k) + ": minimizing over " + std::to_string(grid.size()) + " nodes");
    MinimizeResult r = local_minimize(lag, Path(m, grid, std::move(start)), bc, opt);
    if (!r.converged) continue;
    ++converged_starts;
    if (!best || r.action < best->action) {
      best = std::move(r);
      best_start = k;
    }
  }
  if (!best) throw Error(ErrorCode::NoConvergence, "minimizer: no start converged");
  const MinimizeResult& res = *best;
  Artifacts a;
  a.summary = {{"action", res.action},         {"gradient_norm", res.gradient_norm}, {"iterations", res.iterations},
               {"converged", res.converged},   {"stationarity", res.stationarity},   {"message", res.message},
               {"starts", starts},             {"converged_starts", converged_starts}, {"best_start", best_start}};
  if (const std::size_t probes = count(s, "probes", 0); probes > 0) {
    const SecondVariationReport sv = second_variation_check(lag, res.path, bc, probes, cfg.seed);
    a.summary["second_variation"] = {{"min_quotient", sv.min_quotient},
                                     {"locally_minimal_candidate", sv.locally_minimal_candidate}};
  }
  Series hist;
  std::vector<double> it;
  for (std::size_t k = 0; k < res.history.size(); ++k) it.push_back(static_cast<double>(k));
  hist.add("iteration", std::move(it));
  hist.add("action", res.history);
  a.series.emplace_back("path", path_series(res.path));
  a.series.emplace_back("history", std::move(hist));
  return a;
}

Artifacts run_averaging(const ExperimentConfig& cfg, const Logger& log) {
  const json& s = cfg.settings;
  Artifacts a;
  json per_alpha = json::array();
  const std::size_t n = std::max<std::size_t>(count(s, "theta_samples", 65), 2);
  for (double alpha : numbers(s, "alphas", std::vector<double>{0.5, 1.0, 1.5})) {
    if (log) log("averaging Phi for alpha = " + short_number(alpha));
    const double nested = average_phi(alpha, QuadScheme::Nested), swapped = average_phi(alpha, QuadScheme::Swapped);
    json entry = {{"alpha", alpha},
                  {"phi_at_pi", phi_alpha(alpha, std::numbers::pi)},
                  {"average_nested", nested},
                  {"average_swapped", swapped},
                  {"scheme_difference", std::abs(nested - swapped)},
                  {"negative", nested < 0.0 && swapped < 0.0}};
    Series phi;
    std::vector<double> th, val;
    for (std::size_t k = 0; k < n; ++k) {
      // theta = 0 is infinite for alpha >= 1; start half a step in
      const double t = std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
      th.push_back(t);
      val.push_back(phi_alpha(alpha, t));
    }
    phi.add("theta", std::move(th));
    phi.add("phi", std::move(val));
    a.series.emplace_back("phi_alpha_" + short_number(alpha), std::move(phi));

    if (s.contains("variation")) {
      const json& v = s["variation"];
      const PotentialSpec oc = PotentialSpec::one_center(2, alpha);
      const Subspace plane = Subspace::whole(oc.metric());
      const Circle circle = Circle::of(plane);
      Vec dir(2);
      dir << 1.0, 0.0;
      const BlowUp q = BlowUp::parabolic(oc, dir);
      const double T = number(v, "T", 1.0);
      const double predicted = averaged_s_on_circle(oc, q.zeta, plane).value;
      json rows = json::array();
      for (double d : numbers(v, "deltas")) {
        const auto avg = circle_average(
            [&](double th) { return action_differential(q, oc, StandardVariation(d * circle.at(th), T, oc.metric())); },
            singular_angles(oc, q.zeta, circle), 256, 1e-9, alpha > 1.0 ? alpha - 1.0 : 0.0);
        const double scaled = avg.value / std::pow(d, 1.0 - 0.5 * alpha);
        rows.push_back({{"delta", d},
                        {"average", avg.value},
                        {"scaled", scaled},
                        {"relative_to_prediction", std::abs(scaled - predicted) / std::abs(predicted)}});
      }
      entry["variation"] = {{"zeta", from_vec(q.zeta)}, {"T", T}, {"predicted_scaled", predicted}, {"rows", rows}};
    }
    per_alpha.push_back(std::move(entry));
  }
  a.summary = {{"alphas", per_alpha}};
  if (s.contains("log_bound")) {
    const json& lb = s["log_bound"];
    if (log) log("two-body logarithmic averaging");
    const MassMetric m = MassMetric::unit(2, 2);
    const PotentialSpec spec = PotentialSpec::logarithmic_n_body(m);
    const double h = 1.0 / std::sqrt(2.0);
    Vec s0(4), s1(4);
    s0 << h, 0.0, -h, 0.0;
    s1 << 0.0, h, 0.0, -h;
    Mat basis(4, 2);
    basis << s0, s1;
    const Subspace plane = Subspace::from_span(m, basis);
    const LogEjection ej{number(lb, "M", 1.0), number(lb, "R", 1.0)};
    if (std::abs(ej.M - 1.0) > 0.0) config_error("log_bound: the two-body unit-mass fixture has M = 1");
    const auto rep = averaged_log_action_bound([&](double t) { return Vec(ej.radius(t) * s0); }, spec,
                                               numbers(lb, "deltas"), plane, number(lb, "T", 0.5));
    a.summary["log_bound"] = to_json(rep);
    Series rows;
    rows.add("delta", rep.delta);
    rows.add("potential", rep.potential);
    rows.add("kinetic", rep.kinetic);
    rows.add("total", rep.total);
    a.series.emplace_back("log_bound", std::move(rows));
  }
  return a;
}

Artifacts run_assumptions(const ExperimentConfig& cfg, const PotentialSpec& spec, const Logger& log) {
  const json& s = cfg.settings;
  SamplerOptions so;
  so.seed = cfg.seed;
  if (s.contains("sampler")) {
    const json& j = s["sampler"];
    so.count = count(j, "count", so.count);
    so.r_min = number(j, "r_min", so.r_min);
    so.r_max = number(j, "r_max", so.r_max);
    so.t_min = number(j, "t_min", so.t_min);
    so.t_max = number(j, "t_max", so.t_max);
    so.separation = number(j, "separation", so.separation);
  }
  AssumptionOptions ao;
  ao.tol = number(s, "tol", ao.tol);
  ao.small_radius = number(s, "small_radius", ao.small_radius);
  ao.limit_tol = number(s, "limit_tol", ao.limit_tol);
  if (s.contains("plane")) {
    Mat b(spec.metric().size(), 2);
    for (int k = 0; k < 2; ++k) {
      const std::vector<double> v = s["plane"][static_cast<std::size_t>(k)].get<std::vector<double>>();
      if (static_cast<int>(v.size()) != spec.metric().size()) config_error("plane vectors must have n * d entries");
      b.col(k) = to_vec(v);
    }
    ao.plane = Subspace::from_span(spec.metric(), b);
  }
  if (log) log("checking assumptions on " + std::to_string(so.count) + " samples");
  const AssumptionReport rep = check_assumptions(spec, so, ao);
  Artifacts a;
  json checks = json::array();
  Series margins;
  std::vector<double> idx, margin;
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name},
                      {"applicable", c.applicable},
                      {"passed", c.passed},
                      {"margin", c.margin},
                      {"detail", c.detail}});
    idx.push_back(static_cast<double>(idx.size()));
    margin.push_back(c.margin);
  }
  margins.add("check", std::move(idx));
  margins.add("margin", std::move(margin));
  a.summary = {{"all_passed", rep.all_passed()}, {"checks", checks}};
  a.series.emplace_back("margins", std::move(margins));
  a.exit_code = rep.all_passed() ? 0 : 2;
  return a;
}

void write_text(const fs::path& file, const std::string& body) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot write " + file.string());
  os << body;
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + file.string());
}

void check_output_dir(const fs::path& out) {
  if (out.empty()) throw Error(ErrorCode::ConfigError, "--out is required");
  if (fs::exists(out) && !(fs::is_directory(out) && fs::is_empty(out))) {
    throw Error(ErrorCode::IoError, "output directory " + out.string() + " exists and is not empty");
  }
}

}  // namespace

std::string_view subcommand_name(Experiment kind) {
  switch (kind) {
    case Experiment::Integrate: return "simulate";
    case Experiment::Minimize: return "minimize";
    case Experiment::Sundman: return "sundman-fit";
    case Experiment::Averaging: return "averaging";
    case Experiment::Assumptions: return "check-assumptions";
    case Experiment::Reduce: return "reduce-partial";
  }
  return "";
}

std::string_view section_name(Experiment kind) {
  switch (kind) {
    case Experiment::Integrate: return "integrate";
    case Experiment::Minimize: return "minimize";
    case Experiment::Sundman: return "sundman";
    case Experiment::Averaging: return "averaging";
    case Experiment::Assumptions: return "assumptions";
    case Experiment::Reduce: return "reduce";
  }
  return "";
}

std::optional<Experiment> experiment_from_subcommand(std::string_view name) {
  for (Experiment k : {Experiment::Integrate, Experiment::Minimize, Experiment::Sundman, Experiment::Averaging,
                       Experiment::Assumptions, Experiment::Reduce}) {
    if (subcommand_name(k) == name) return k;
  }
  return std::nullopt;
}

ExperimentConfig parse_config(const json& doc, Experiment kind, const fs::path& base_dir) {
  const std::string section(section_name(kind));
  allow_keys(doc, "config", {"version", "experiment", "seed", "potential", "integrate", "minimize", "sundman",
                              "averaging", "assumptions", "reduce"});
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.base_dir = base_dir;
  if (!doc.contains("version") || !doc["version"].is_number_integer()) config_error("config needs an integer 'version'");
  cfg.version = doc["version"].get<int>();
  if (cfg.version != 1) config_error("unsupported config version " + std::to_string(cfg.version));
  if (doc.contains("experiment") && text(doc, "experiment") != section) {
    config_error("config is for experiment '" + text(doc, "experiment") + "', not '" + section + "'");
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != section && key != "version" && key != "experiment" && key != "seed" && key != "potential") {
      config_error("section '" + key + "' does not belong to experiment '" + section + "'");
    }
  }
  cfg.seed = count(doc, "seed", 1);
  if (kind == Experiment::Minimize && doc.contains(section) && doc[section].is_object() && doc[section].contains("seed")) {
    const std::uint64_t local = count(doc[section], "seed");
    if (doc.contains("seed") && local != cfg.seed) config_error("minimize.seed disagrees with the top-level seed");
    cfg.seed = local;
  }
  if (kind == Experiment::Averaging) {
    if (doc.contains("potential")) config_error("averaging uses built-in fixtures; remove 'potential'");
  } else {
    if (!doc.contains("potential")) config_error("missing 'potential'");
    cfg.potential = doc["potential"];
    potential_from_json(cfg.potential);
  }
  cfg.settings = doc.contains(section) ? doc[section] : json::object();
  validate_section(kind, cfg.settings, section);
  return cfg;
}

ExperimentConfig load_config(const fs::path& file, Experiment kind) {
  std::ifstream is(file);
  if (!is) throw Error(ErrorCode::ConfigError, "cannot read config " + file.string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc, kind, file.parent_path());
}

Artifacts run_experiment(const ExperimentConfig& cfg, const Logger& log) {
  Artifacts a;
  if (cfg.kind == Experiment::Averaging) {
    a = run_averaging(cfg, log);
  } else {
    const PotentialSpec spec = potential_from_json(cfg.potential);
    switch (cfg.kind) {
      case Experiment::Integrate: a = run_integrate(cfg, spec, log); break;
      case Experiment::Minimize: a = run_minimize(cfg, spec, log); break;
      case Experiment::Sundman: a = run_sundman(cfg, spec, log); break;
      case Experiment::Assumptions: a = run_assumptions(cfg, spec, log); break;
      case Experiment::Reduce: a = run_reduce(cfg, spec, log); break;
      case Experiment::Averaging: break;
    }
    a.summary["potential"] = potential_summary(spec);
  }
  a.summary["experiment"] = std::string(section_name(cfg.kind));
  a.summary["version"] = cfg.version;
  a.summary["seed"] = cfg.seed;
  return a;
}

void write_artifacts(const Artifacts& artifacts, const fs::path& out) {
  check_output_dir(out);
  const fs::path target = fs::absolute(out);
  const fs::path staging = target.parent_path() / (target.filename().string() + ".staging");
  try {
    fs::remove_all(staging);
    fs::create_directories(staging / "series");
    write_text(staging / "summary.json", artifacts.summary.dump(2) + "\n");
    if (!artifacts.events.is_null()) write_text(staging / "events.json", artifacts.events.dump(2) + "\n");
    for (const auto& [name, series] : artifacts.series) write_text(staging / "series" / (name + ".csv"), series_csv(series));
    if (fs::exists(target)) fs::remove(target);
    fs::rename(staging, target);
  } catch (const fs::filesystem_error& e) {
    std::error_code ignored;
    fs::remove_all(staging, ignored);
    throw Error(ErrorCode::IoError, e.what());
  } catch (...) {
    std::error_code ignored;
    fs::remove_all(staging, ignored);
    throw;
  }
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
      return 1;
    case ErrorCode::AssumptionViolation:
    case ErrorCode::NotSubspaceArrangement:
      return 2;
    default:
      return 3;
  }
}

int run(Experiment kind, const fs::path& config, const fs::path& out, std::optional<std::uint64_t> seed, bool verbose,
        std::ostream& err) {
  try {
    ExperimentConfig cfg = load_config(config, kind);
    if (seed) cfg.seed = *seed;
    check_output_dir(out);
    Logger log;
    if (verbose) log = [&err](const std::string& msg) { err << "[singlab] " << msg << '\n'; };
    const Artifacts a = run_experiment(cfg, log);
    write_artifacts(a, out);
    if (verbose) err << "[singlab] wrote " << out.string() << '\n';
    return a.exit_code;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    err << "error: ConfigError: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace singlab::cli
