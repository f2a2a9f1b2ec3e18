#include "singlab/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "singlab/error.hpp"

namespace singlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec tangential(const MassMetric& metric, const Vec& g, const Vec& s) {
  return g - metric.dot(g, s) / metric.norm2(s) * s;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

AssumptionCheck not_applicable(std::string name, std::string why) {
  AssumptionCheck c;
  c.name = std::move(name);
  c.applicable = false;
  c.detail = std::move(why);
  return c;
}

AssumptionCheck finish(std::string name, double margin, bool passed, std::string detail) {
  AssumptionCheck c;
  c.name = std::move(name);
  c.margin = margin;
  c.passed = passed;
  c.detail = std::move(detail);
  return c;
}

Vec rotate_in_plane(const Subspace& plane, const Vec& x, double angle) {
  const Vec c = plane.coordinates(x);
  const Vec rest = x - plane.from_coordinates(c);
  Vec cr(2);
  cr(0) = std::cos(angle) * c(0) - std::sin(angle) * c(1);
  cr(1) = std::sin(angle) * c(0) + std::cos(angle) * c(1);
  return rest + plane.from_coordinates(cr);
}

AssumptionCheck check_u0(const PotentialSpec& spec, const std::vector<Sample>& samples) {
  double worst = kInf;
  std::size_t failures = 0;
  for (const auto& s : samples) {
    const Vec xi = spec.nearest_singular_point(s.x);
    double prev = spec.evaluate(s.t, s.x);
    const double first = prev;
    bool ok = true;
    for (int k = 1; k <= 8; ++k) {
      const Vec y = xi + std::pow(10.0, -k) * (s.x - xi);
      double u;
      try {
        u = spec.evaluate(s.t, y);
      } catch (const SingularConfiguration&) {
        break;
      }
      if (!(u > prev)) ok = false;
      prev = u;
    }
    worst = std::min(worst, (prev - first) / (1.0 + std::abs(first)));
    if (!ok) ++failures;
  }
  return finish("U0", worst, failures == 0,
                failures == 0 ? "U increases along every sampled ray toward Delta"
                              : std::to_string(failures) + " rays with non-increasing U");
}

AssumptionCheck check_u1(const PotentialSpec& spec, const std::vector<Sample>& samples) {
  double worst_ratio = 0.0;
  for (const auto& s : samples) {
    const double u = spec.evaluate(s.t, s.x);
    const double rate = spec.partial_t(s.t, s.x);
    worst_ratio = std::max(worst_ratio, std::abs(rate) / (std::max(u, 0.0) + 1.0));
  }
  const double c1 = spec.constants().c1;
  return finish("U1", c1 - worst_ratio, worst_ratio <= c1 * (1.0 + 1e-12) + 1e-15,
                "max |dU/dt|/(U+1) = " + fmt(worst_ratio) + ", C1 = " + fmt(c1));
}

AssumptionCheck check_u2(const PotentialSpec& spec, const std::vector<Sample>& samples, double tol) {
  const double at = spec.alpha_tilde();
  const double c2 = spec.constants().c2;
  double worst = kInf;
  for (const auto& s : samples) {
    const double u = spec.evaluate(s.t, s.x);
    const double euler = spec.metric().dot(spec.gradient(s.t, s.x), s.x);
    worst = std::min(worst, (euler + at * u + c2) / (1.0 + std::abs(u)));
  }
  return finish("U2", worst, worst >= -tol, "alpha_tilde = " + fmt(at) + ", min relative margin " + fmt(worst));
}

AssumptionCheck check_u2_local(const PotentialSpec& spec, const std::vector<Sample>& samples,
                               const AssumptionOptions& opt) {
  const auto& k = spec.constants();
  const MassMetric& m = spec.metric();
  double worst = kInf;
  std::size_t used = 0;
  for (const auto& s : samples) {
    const double r = m.norm(s.x);
    if (r > opt.small_radius) continue;
    ++used;
    const double u = spec.evaluate(s.t, s.x);
    const double euler = m.dot(spec.gradient(s.t, s.x), s.x);
    if (spec.is_logarithmic()) {
      const double mt = spec.log_coefficient(s.t);
      const double v = euler + mt + k.c2 * std::pow(r, k.gamma) * u;
      worst = std::min(worst, v / (1.0 + std::abs(mt)));
    } else {
      const double v = euler + spec.alpha() * u + k.c2 * std::pow(r, k.gamma) * u;
      worst = std::min(worst, v / u);
    }
  }
  const std::string name = spec.is_logarithmic() ? "U2l" : "U2h";
  if (used == 0) return not_applicable(name, "no samples with small |x|");
  return finish(name, worst, worst >= -opt.tol, "min relative margin " + fmt(worst) + " over " + std::to_string(used) + " samples");
}

const double kProbeRadii[] = {1e-3, 1e-4, 1e-5, 1e-6};

AssumptionCheck check_u3(const PotentialSpec& spec, const std::vector<Sample>& samples,
                         const AssumptionOptions& opt) {
  const MassMetric& m = spec.metric();
  const bool log = spec.is_logarithmic();
  double worst = 0.0;
  std::size_t non_monotone = 0;
  for (const auto& s : samples) {
    const Vec dir = s.x / m.norm(s.x);
    const double limit = spec.limit_potential(s.t, dir);
    const double scale = std::abs(limit) + 1e-300;
    double prev = kInf;
    double last = 0.0;
    for (double r : kProbeRadii) {
      const double u = spec.evaluate(s.t, r * dir);
      const double approx = log ? u + spec.log_coefficient(s.t) * std::log(r) : std::pow(r, spec.alpha()) * u;
      last = std::abs(approx - limit) / (log ? 1.0 + std::abs(limit) : scale);
      if (last > prev * (1.0 + 1e-6) + 1e-12) ++non_monotone;
      prev = last;
    }
    worst = std::max(worst, last);
  }
  const std::string name = log ? "U3l" : "U3h";
  return finish(name, opt.limit_tol - worst, worst <= opt.limit_tol && non_monotone == 0,
                "max relative distance to the limit at r = 1e-6: " + fmt(worst) +
                    (non_monotone ? ", " + std::to_string(non_monotone) + " non-monotone steps" : ""));
}

AssumptionCheck check_u4(const PotentialSpec& spec, const std::vector<Sample>& samples,
                         const AssumptionOptions& opt) {
  const MassMetric& m = spec.metric();
  const bool log = spec.is_logarithmic();
  double worst = 0.0;
  for (const auto& s : samples) {
    const Vec dir = s.x / m.norm(s.x);
    const Vec limit = spec.limit_tangential_gradient(s.t, dir);
    const double scale = m.norm(limit) + std::abs(spec.limit_potential(s.t, dir)) + 1.0;
    const double r = kProbeRadii[3];
    const Vec g = tangential(m, spec.gradient(s.t, r * dir), dir) * (log ? r : std::pow(r, spec.alpha() + 1.0));
    worst = std::max(worst, m.norm(g - limit) / scale);
  }
  const std::string name = log ? "U4l" : "U4h";
  return finish(name, opt.limit_tol - worst, worst <= opt.limit_tol,
                "max relative tangential-gradient error at r = 1e-6: " + fmt(worst));
}

AssumptionCheck check_u5(const PotentialSpec& spec, const std::vector<Sample>& samples, std::mt19937_64& rng) {
  const MassMetric& m = spec.metric();
  const auto spaces = spec.singular_subspaces();
  std::normal_distribution<double> gauss;
  double worst_growth = 0.0;
  std::size_t probes = 0;
  for (const auto& v : spaces) {
    std::size_t used = 0;
    for (std::size_t k = 0; k < samples.size() && used < 8; ++k) {
      const double t = samples[k].t;
      const Vec xi = v.project(samples[k].x);
      if (spec.singular_distance(xi) > 1e-9 * (1.0 + m.norm(xi))) continue;
      // generic points of V only: the probes move up to 1e-2 (1 + |xi|) off V
      bool generic = true;
      for (const auto& w : spaces) {
        if (!w.contains(v) && w.distance(xi) < 0.2 * (1.0 + m.norm(xi))) generic = false;
      }
      if (!generic) continue;
      ++used;
      PotentialSpec singular = spec.singular_part_at(xi, 1e-9 * (1.0 + m.norm(xi)));
      Vec e(m.size());
      for (int i = 0; i < e.size(); ++i) e(i) = gauss(rng);
      e = v.complement(e);
      if (m.norm(e) == 0.0) continue;
      e /= m.norm(e);
      Vec dir(m.size());
      for (int i = 0; i < dir.size(); ++i) dir(i) = gauss(rng);
      dir /= m.norm(dir);
      const double scale = 1.0 + m.norm(xi);
      auto remainder = [&](const Vec& x) { return spec.evaluate(t, x) - singular.evaluate(t, x); };
      const double h = 1e-5 * scale;
      double lo = kInf, hi = 0.0;
      try {
        for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
          const Vec x = xi + eps * scale * e;
          const double q = std::abs(remainder(x + h * dir) - remainder(x - h * dir)) / (2.0 * h);
          if (!std::isfinite(q)) throw Error(ErrorCode::NonFiniteState, "");
          lo = std::min(lo, q);
          hi = std::max(hi, q);
        }
      } catch (const Error&) {
        hi = kInf;
      }
      ++probes;
      worst_growth = std::max(worst_growth, hi / (lo + 1.0));
    }
  }
  if (probes == 0) return not_applicable("U5", "no generic points on the singular subspaces were sampled");
  return finish("U5", 10.0 - worst_growth, worst_growth <= 10.0,
                "max growth of the remainder's difference quotients approaching Delta: " + fmt(worst_growth));
}

AssumptionCheck check_u6(const PotentialSpec& limit, const Subspace& plane, const std::vector<Sample>& samples,
                         double tol) {
  double worst = 0.0;
  for (const auto& s : samples) {
    const double u = limit.evaluate(s.t, s.x);
    for (double a : {0.7, 2.1, 4.4}) {
      const Vec y = rotate_in_plane(plane, s.x, a);
      if (limit.is_singular(y)) continue;
      worst = std::max(worst, std::abs(limit.evaluate(s.t, y) - u) / (1.0 + std::abs(u)));
    }
  }
  return finish("U6", tol * 1e3 - worst, worst <= tol * 1e3, "max relative change under rotations in W: " + fmt(worst));
}

AssumptionCheck check_u7h(const PotentialSpec& limit, const Subspace& plane, const std::vector<Sample>& samples,
                          double tol, std::mt19937_64& rng) {
  const MassMetric& m = limit.metric();
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> len(0.05, 2.0);
  const double alpha = limit.alpha();
  double worst = kInf;
  std::size_t used = 0;
  for (const auto& s : samples) {
    const Vec pw = plane.project(s.x);
    if (limit.is_singular(pw)) continue;
    const double ux = limit.evaluate(s.t, s.x);
    const double lambda = std::pow(limit.evaluate(s.t, pw) / ux, 1.0 / alpha);
    Vec c(2);
    const double a = angle(rng), l = len(rng) * m.norm(s.x);
    c << l * std::cos(a), l * std::sin(a);
    const Vec delta = plane.from_coordinates(c);
    const Vec lhs_x = s.x + delta;
    const Vec rhs_x = lambda * pw + delta / lambda;
    if (limit.is_singular(lhs_x) || limit.is_singular(rhs_x)) continue;
    const double lhs = limit.evaluate(s.t, lhs_x);
    const double rhs = limit.evaluate(s.t, rhs_x);
    worst = std::min(worst, (rhs - lhs) / (std::abs(rhs) + std::abs(lhs)));
    ++used;
  }
  if (used == 0) return not_applicable("U7h", "no usable samples");
  return finish("U7h", worst, worst >= -tol * 1e3, "min relative margin " + fmt(worst));
}

AssumptionCheck check_u7l(const PotentialSpec& limit, const Subspace& plane,
                          const std::function<double(const Vec&)>& psi, const std::vector<Sample>& samples) {
  if (!psi) return not_applicable("U7l", "no psi supplied");
  const MassMetric& m = limit.metric();
  double lo = kInf, hi = -kInf, scale = 0.0;
  for (const auto& s : samples) {
    const Vec pw = plane.project(s.x);
    const double p = psi(s.x - pw);
    const double model = -0.5 * limit.log_coefficient(s.t) * std::log(m.norm2(pw) + p * p);
    const double u = limit.evaluate(s.t, s.x);
    lo = std::min(lo, u - model);
    hi = std::max(hi, u - model);
    scale = std::max(scale, std::abs(u));
  }
  const double spread = (hi - lo) / (1.0 + scale);
  return finish("U7l", 1e-9 - spread, spread <= 1e-9,
                "spread of the difference to the model (additive constants allowed): " + fmt(spread));
}

}  // namespace

bool AssumptionReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return !c.applicable || c.passed; });
}

const AssumptionCheck* AssumptionReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<Sample> sample_configurations(const PotentialSpec& spec, const SamplerOptions& o) {
  if (!(o.r_min > 0.0 && o.r_max >= o.r_min) || o.count == 0) {
    throw Error(ErrorCode::InvalidArgument, "sampler needs 0 < r_min <= r_max and count > 0");
  }
  const MassMetric& m = spec.metric();
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Sample> out;
  out.reserve(o.count);
  std::size_t attempts = 0;
  while (out.size() < o.count) {
    if (++attempts > 1000 * o.count) {
      throw Error(ErrorCode::InvalidArgument, "sampler could not find configurations off Delta");
    }
    Vec x(m.size());
    for (int i = 0; i < x.size(); ++i) x(i) = gauss(rng);
    const double r = std::exp(std::log(o.r_min) + unit(rng) * (std::log(o.r_max) - std::log(o.r_min)));
    x *= r / m.norm(x);
    if (spec.singular_distance(x) < o.separation * r) continue;
    out.push_back({o.t_min + unit(rng) * (o.t_max - o.t_min), std::move(x)});
  }
  return out;
}

AssumptionReport check_assumptions(const PotentialSpec& spec, const SamplerOptions& sampler,
                                   const AssumptionOptions& options) {
  const auto samples = sample_configurations(spec, sampler);
  std::mt19937_64 rng(sampler.seed ^ 0x9e3779b97f4a7c15ULL);
  AssumptionReport report;
  auto& c = report.checks;

  double min_u = kInf;
  for (const auto& s : samples) min_u = std::min(min_u, spec.evaluate(s.t, s.x));
  if (spec.is_logarithmic()) {
    c.push_back(not_applicable("positivity", "logarithmic potentials change sign at large |x|"));
  } else {
    c.push_back(finish("positivity", min_u, min_u > 0.0, "min sampled U = " + fmt(min_u)));
  }

  c.push_back(check_u0(spec, samples));
  c.push_back(check_u1(spec, samples));
  c.push_back(check_u2(spec, samples, options.tol));
  c.push_back(check_u2_local(spec, samples, options));
  c.push_back(check_u3(spec, samples, options));
  c.push_back(check_u4(spec, samples, options));
  c.push_back(check_u5(spec, samples, rng));

  if (options.plane) {
    if (options.plane->dim() != 2) throw Error(ErrorCode::InvalidArgument, "W must be a 2-plane");
    const PotentialSpec limit = spec.limit_spec();
    c.push_back(check_u6(limit, *options.plane, samples, options.tol));
    if (spec.is_logarithmic()) {
      c.push_back(check_u7l(limit, *options.plane, options.psi, samples));
    } else {
      c.push_back(check_u7h(limit, *options.plane, samples, options.tol, rng));
    }
  } else {
    c.push_back(not_applicable("U6", "no plane W supplied"));
    c.push_back(not_applicable(spec.is_logarithmic() ? "U7l" : "U7h", "no plane W supplied"));
  }
  return report;
}

AssumptionConstants fit_constants(const PotentialSpec& spec, const SamplerOptions& sampler, double gamma) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
  const auto samples = sample_configurations(spec, sampler);
  const MassMetric& m = spec.metric();
  AssumptionConstants k = spec.constants();
  k.gamma = gamma;
  k.c1 = 0.0;
  k.c2 = 0.0;
  for (const auto& s : samples) {
    const double u = spec.evaluate(s.t, s.x);
    k.c1 = std::max(k.c1, std::abs(spec.partial_t(s.t, s.x)) / (std::max(u, 0.0) + 1.0));
    const double r = m.norm(s.x);
    const double euler = m.dot(spec.gradient(s.t, s.x), s.x);
    const double deficit = spec.is_logarithmic() ? -(euler + spec.log_coefficient(s.t))
                                                 : -(euler + spec.alpha() * u);
    if (deficit > 0.0 && u > 0.0) k.c2 = std::max(k.c2, deficit / (std::pow(r, gamma) * u));
  }
  return k;
}

}  // namespace singlab
