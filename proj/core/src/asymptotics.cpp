#include "singlab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "singlab/error.hpp"

namespace singlab {

std::string to_string(CollisionSide side) {
  switch (side) {
    case CollisionSide::Left: return "left";
    case CollisionSide::Right: return "right";
    case CollisionSide::Interior: return "interior";
  }
  return "unknown";
}

std::string to_string(CollisionKind kind) { return kind == CollisionKind::Total ? "total" : "partial"; }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Relative {
  std::vector<double> r, rdot;
  std::vector<Vec> w, wdot;
};

Relative relative_motion(const Path& path, const Subspace& v, std::size_t j0, std::size_t j1) {
  const MassMetric& m = path.metric();
  Relative rel;
  for (std::size_t j = j0; j <= j1; ++j) {
    Vec w = v.complement(path.point(j));
    Vec wd = v.complement(path.velocity(j));
    const double r = m.norm(w);
    rel.r.push_back(r);
    rel.rdot.push_back(r > 0.0 ? m.dot(w, wd) / r : 0.0);
    rel.w.push_back(std::move(w));
    rel.wdot.push_back(std::move(wd));
  }
  return rel;
}

bool contained_in_all_generators(const CollisionLattice& lat, std::size_t k) {
  for (std::size_t g = 1; g < lat.size(); ++g) {
    if (lat.is_generator(g) && !lat.element(g).contains(lat.element(k))) return false;
  }
  return true;
}

double arc_length(const Path& path, std::size_t a, std::size_t b) {
  double len = 0.0;
  for (std::size_t j = std::min(a, b); j < std::max(a, b); ++j) len += path.metric().norm(path.point(j + 1) - path.point(j));
  return len;
}

// exp(x^2) erfc(x) for x >= 0.
double erfcx(double x) {
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  const double x2 = x * x;
  return 1.0 / (x * std::sqrt(std::numbers::pi)) * (1.0 - 1.0 / (2.0 * x2) + 3.0 / (4.0 * x2 * x2));
}

// Richardson extrapolation of q(rho) = b + c rho^gamma from geometric radii
// inside [rmin, rmax]; returns (estimate, spread).
std::pair<double, double> extrapolate(const std::vector<double>& r, const std::vector<double>& q, double gamma) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (r[j] > 0.0 && std::isfinite(q[j])) pts.emplace_back(r[j], q[j]);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> rs, qs;
  for (auto& [a, b] : pts) {
    if (!rs.empty() && a == rs.back()) continue;
    rs.push_back(a);
    qs.push_back(b);
  }
  if (rs.size() < 2) return {qs.empty() ? std::nan("") : qs.front(), kInf};
  const double rmin = rs.front(), rmax = rs.back();
  const double ratio = std::min(std::sqrt(10.0), std::pow(rmax / rmin, 1.0 / 3.0));
  double rho[3] = {rmin, rmin * ratio, rmin * ratio * ratio};
  double qv[3];
  for (int k = 0; k < 3; ++k) qv[k] = value_at_radius(rs, qs, rho[k]);
  auto rich = [&](int a, int b) {
    const double pa = std::pow(rho[a], gamma), pb = std::pow(rho[b], gamma);
    return (pb * qv[a] - pa * qv[b]) / (pb - pa);
  };
  if (!(ratio > 1.0)) return {qv[0], 0.0};
  const double e0 = rich(0, 1), e1 = rich(1, 2);
  return {e0, std::abs(e0 - e1)};
}

std::size_t event_window_far_end(const CollisionEvent& e) {
  return e.side == CollisionSide::Right ? e.window_end : e.window_begin;
}

}  // namespace

double value_at_radius(const std::vector<double>& r, const std::vector<double>& q, double radius) {
  if (r.empty()) throw Error(ErrorCode::InvalidArgument, "empty series");
  if (radius <= r.front()) return q.front();
  if (radius >= r.back()) return q.back();
  const auto it = std::upper_bound(r.begin(), r.end(), radius);
  const std::size_t k = static_cast<std::size_t>(it - r.begin());
  const double a = std::log(r[k - 1]), b = std::log(r[k]);
  const double w = (std::log(radius) - a) / (b - a);
  return (1.0 - w) * q[k - 1] + w * q[k];
}

Subspace collision_subspace(const PotentialSpec& spec, const CollisionEvent& event) {
  const CollisionLattice lat = CollisionLattice::build(spec);
  if (event.lattice_element >= lat.size()) throw Error(ErrorCode::InvalidArgument, "event element outside the lattice");
  return lat.element(event.lattice_element);
}

std::vector<CollisionEvent> detect_collisions(const Path& path, const PotentialSpec& spec, const DetectOptions& opt) {
  const CollisionLattice lat = CollisionLattice::build(spec);
  const MassMetric& m = spec.metric();
  const std::size_t n = path.size();
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j) d[j] = spec.singular_distance(path.point(j));
  const double scale = *std::max_element(d.begin(), d.end());
  std::vector<CollisionEvent> events;
  if (!(scale > 0.0)) return events;
  const double p = spec.is_logarithmic() ? 1.0 : 2.0 / (2.0 + spec.alpha());

  for (std::size_t j = 0; j < n; ++j) {
    if (d[j] > opt.r_rel * scale) continue;
    if (j > 0 && d[j] > d[j - 1]) continue;
    if (j + 1 < n && d[j] > d[j + 1]) continue;
    if (j > 0 && d[j] == d[j - 1] && !events.empty() && events.back().sample == j - 1) continue;
    CollisionEvent e;
    e.sample = j;
    e.side = j + 1 == n ? CollisionSide::Left : (j == 0 ? CollisionSide::Right : CollisionSide::Interior);
    std::size_t wb = j, we = j;
    if (e.side != CollisionSide::Right) {
      while (wb > 0 && d[wb - 1] > d[wb]) --wb;
    }
    if (e.side != CollisionSide::Left) {
      while (we + 1 < n && d[we + 1] > d[we]) ++we;
    }
    e.window_begin = wb;
    e.window_end = we;
    const Vec& x = path.point(j);
    e.lattice_element = lat.mu_of(x, std::max(1e-8 * (1.0 + m.norm(x)), 4.0 * d[j]));
    e.clusters = lat.partition(e.lattice_element);
    e.limit = lat.project(e.lattice_element, x);
    e.kind = contained_in_all_generators(lat, e.lattice_element) ? CollisionKind::Total : CollisionKind::Partial;

    const Vec w = lat.complement(e.lattice_element, x);
    const Vec wd = lat.complement(e.lattice_element, path.velocity(j));
    const double r = m.norm(w);
    const double rdot = r > 0.0 ? m.dot(w, wd) / r : 0.0;
    e.t_star = path.time(j);
    if (e.side != CollisionSide::Interior && r > 0.0 && rdot != 0.0) {
      const double gap = p * r / std::abs(rdot);
      e.t_star += e.side == CollisionSide::Left ? gap : -gap;
    }

    // A collision has a limit configuration: the arc length over successive
    // decades of the distance must shrink.
    if (e.side != CollisionSide::Interior && d[j] > 0.0) {
      const std::size_t far = e.side == CollisionSide::Left ? wb : we;
      if (d[far] >= 100.0 * d[j]) {
        auto find_level = [&](double level) {
          std::size_t k = j;
          if (e.side == CollisionSide::Left) {
            while (k > wb && d[k] < level) --k;
          } else {
            while (k < we && d[k] < level) ++k;
          }
          return k;
        };
        const std::size_t k10 = find_level(10.0 * d[j]), k100 = find_level(100.0 * d[j]);
        const double last = arc_length(path, k10, j), previous = arc_length(path, k100, k10);
        if (last > previous && last > 1e-6 * (1.0 + m.norm(x))) {
          throw Error(ErrorCode::AmbiguousEvent, "potential blows up without a limit configuration at t = " +
                                                     std::to_string(path.time(j)));
        }
      }
    }
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<CollisionEvent> detect_collisions(const OdeSolution& sol, const PotentialSpec& spec, const DetectOptions& opt) {
  return detect_collisions(sol.path(), spec, opt);
}

bool collisions_isolated(const std::vector<CollisionEvent>& events) {
  for (std::size_t a = 0; a < events.size(); ++a) {
    for (std::size_t b = 0; b < events.size(); ++b) {
      if (a == b) continue;
      if (events[b].sample >= events[a].window_begin && events[b].sample <= events[a].window_end) return false;
    }
  }
  return true;
}

namespace {

struct FitWindow {
  std::vector<std::size_t> idx;  // path samples used
  Relative rel;                  // over the whole event window
  std::size_t base = 0;          // path index of rel[0]
  double r_start = 0.0;
};

FitWindow select_window(const CollisionEvent& e, const Path& path, const Subspace& v, const FitOptions& opt,
                        double t_star) {
  if (e.side == CollisionSide::Interior) {
    throw Error(ErrorCode::InvalidArgument, "Sundman fits need an event at a path end");
  }
  FitWindow fw;
  fw.base = e.window_begin;
  fw.rel = relative_motion(path, v, e.window_begin, e.window_end);
  fw.r_start = fw.rel.r[event_window_far_end(e) - fw.base];
  const double gap = opt.min_time_gap * (1.0 + std::abs(t_star));
  for (std::size_t j = e.window_begin; j <= e.window_end; ++j) {
    const double r = fw.rel.r[j - fw.base];
    if (!(r > 0.0) || r > opt.start_fraction * fw.r_start) continue;
    if (std::abs(t_star - path.time(j)) <= gap) continue;
    fw.idx.push_back(j);
  }
  if (fw.idx.size() < 4) throw Error(ErrorCode::WindowTooShort, "fewer than 4 samples in the fit window");
  double rmin = kInf, rmax = 0.0;
  for (std::size_t j : fw.idx) {
    rmin = std::min(rmin, fw.rel.r[j - fw.base]);
    rmax = std::max(rmax, fw.rel.r[j - fw.base]);
  }
  if (std::log10(rmax / rmin) < opt.min_decades) {
    throw Error(ErrorCode::WindowTooShort, "fit window spans " + std::to_string(std::log10(rmax / rmin)) + " decades of r");
  }
  return fw;
}

struct LineFit {
  double slope = 0.0, intercept = 0.0, ss = 0.0, sxx = 0.0;
};

LineFit regress(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.sxx = sxx;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = y[k] - f.intercept - f.slope * x[k];
    f.ss += e * e;
  }
  return f;
}

}  // namespace

SundmanFit fit_sundman(const CollisionEvent& e, const Path& path, const PotentialSpec& spec, const FitOptions& opt) {
  if (spec.is_logarithmic()) throw Error(ErrorCode::InvalidArgument, "use the logarithmic fit for logarithmic potentials");
  const Subspace v = collision_subspace(spec, e);
  const MassMetric& m = spec.metric();
  const double alpha = spec.alpha();
  const FitWindow fw = select_window(e, path, v, opt, e.t_star);
  const double sign = e.side == CollisionSide::Left ? 1.0 : -1.0;

  // Nearest used sample to t*; gaps are measured from it so that t* - t_j is
  // formed without cancellation.
  std::size_t j_near = fw.idx.front();
  for (std::size_t j : fw.idx) {
    if (sign * (path.time(j) - path.time(j_near)) > 0.0) j_near = j;
  }
  const double t_near = path.time(j_near);
  const double g0 = std::max(sign * (e.t_star - t_near), 1e-15 * (1.0 + std::abs(t_near)));
  std::vector<double> offset, logr;
  for (std::size_t j : fw.idx) {
    offset.push_back(sign * (t_near - path.time(j)));
    logr.push_back(std::log(fw.rel.r[j - fw.base]));
  }
  auto fit_for = [&](double log_gap) {
    const double g = std::exp(log_gap);
    std::vector<double> ls(offset.size());
    for (std::size_t k = 0; k < offset.size(); ++k) ls[k] = std::log(offset[k] + g);
    return regress(ls, logr);
  };
  const auto best = boost::math::tools::brent_find_minima([&](double lg) { return fit_for(lg).ss; },
                                                          std::log(g0) - 12.0, std::log(g0) + 6.0, 50);
  const double gap = std::exp(best.first);
  const LineFit lf = fit_for(best.first);

  SundmanFit f;
  f.t_star = t_near + sign * gap;
  f.exponent = lf.slope;
  const double n = static_cast<double>(fw.idx.size());
  f.exponent_ci = 2.0 * std::sqrt(lf.ss / std::max(1.0, n - 2.0) / lf.sxx);
  f.expected_exponent = 2.0 / (2.0 + alpha);
  f.K = std::exp(lf.intercept / lf.slope);
  f.residual_rms = std::sqrt(lf.ss / n);
  f.samples = fw.idx.size();
  f.window_t0 = path.time(fw.idx.front());
  f.window_t1 = path.time(fw.idx.back());
  f.window_r0 = fw.rel.r[fw.idx.front() - fw.base];
  f.window_r1 = fw.rel.r[fw.idx.back() - fw.base];
  if (std::abs(f.exponent - f.expected_exponent) > opt.exponent_band) {
    throw Error(ErrorCode::ExponentMismatch, "fitted exponent " + std::to_string(f.exponent) + " against " +
                                                 std::to_string(f.expected_exponent));
  }

  // Limits of r^alpha U and rdot^2 r^alpha / 2 over all window samples below the start radius.
  std::vector<double> rr, q_pot, q_kin;
  f.phi_min = kInf;
  f.phi_max = -kInf;
  for (std::size_t j = e.window_begin; j <= e.window_end; ++j) {
    const double r = fw.rel.r[j - fw.base];
    if (!(r > 0.0) || r > opt.start_fraction * fw.r_start) continue;
    const double ra = std::pow(r, alpha);
    const double rdot = fw.rel.rdot[j - fw.base];
    rr.push_back(r);
    q_pot.push_back(spec.is_singular(path.point(j)) ? kInf : ra * spec.evaluate(path.time(j), path.point(j)));
    q_kin.push_back(0.5 * rdot * rdot * ra);
    const double phi = -sign * rdot * std::pow(r, alpha / 2.0);
    f.phi_min = std::min(f.phi_min, phi);
    f.phi_max = std::max(f.phi_max, phi);
  }
  const double gamma = spec.constants().gamma > 0.0 ? spec.constants().gamma : 1.0;
  const auto [bp, ep] = extrapolate(rr, q_pot, gamma);
  const auto [bk, ek] = extrapolate(rr, q_kin, gamma);
  f.b = bp;
  f.b_kinetic = bk;
  f.b_error = std::max(ep, ek);
  (void)m;
  return f;
}

SundmanFit fit_sundman_log(const CollisionEvent& e, const Path& path, const PotentialSpec& spec, const FitOptions& opt) {
  if (!spec.is_logarithmic()) throw Error(ErrorCode::InvalidArgument, "logarithmic fit needs a logarithmic potential");
  const Subspace v = collision_subspace(spec, e);
  const double sign = e.side == CollisionSide::Left ? 1.0 : -1.0;

  // t* from the radial energy integral at the sample nearest the collision:
  // rdot^2 = a + 2 M log(r_j / rho) integrates to r_j sqrt(pi/(2M)) erfcx(sqrt(a/(2M))).
  const Relative rel = relative_motion(path, v, e.sample, e.sample);
  const double mc = spec.log_coefficient(path.time(e.sample));
  if (!(mc > 0.0)) throw Error(ErrorCode::InvalidArgument, "logarithmic coefficient must be positive");
  const double a = rel.rdot[0] * rel.rdot[0];
  const double tau = rel.r[0] * std::sqrt(std::numbers::pi / (2.0 * mc)) * erfcx(std::sqrt(a / (2.0 * mc)));
  const double t_star = path.time(e.sample) + sign * tau;

  const FitWindow fw = select_window(e, path, v, opt, t_star);
  SundmanFit f;
  f.log_law = true;
  f.t_star = t_star;
  f.M0 = spec.log_coefficient(t_star);
  f.expected_exponent = 1.0;
  f.exponent = 1.0;
  f.samples = fw.idx.size();
  f.window_t0 = path.time(fw.idx.front());
  f.window_t1 = path.time(fw.idx.back());
  f.window_r0 = fw.rel.r[fw.idx.front() - fw.base];
  f.window_r1 = fw.rel.r[fw.idx.back() - fw.base];
  f.phi_min = kInf;
  f.phi_max = -kInf;
  double ss = 0.0;
  std::size_t counted = 0;
  for (std::size_t j : fw.idx) {
    const double r = fw.rel.r[j - fw.base];
    const double rdot = fw.rel.rdot[j - fw.base];
    const double s = sign * (t_star - path.time(j));
    const double law = s < 1.0 ? s * std::sqrt(-2.0 * f.M0 * std::log(s)) : std::nan("");
    f.r.push_back(r);
    f.law_ratio.push_back(r / law);
    f.energy_ratio.push_back(r < 1.0 ? rdot * rdot / (-2.0 * std::log(r)) : std::nan(""));
    if (std::isfinite(f.law_ratio.back())) {
      ss += std::pow(f.law_ratio.back() - 1.0, 2);
      ++counted;
    }
    const double phi = -sign * rdot;
    f.phi_min = std::min(f.phi_min, phi);
    f.phi_max = std::max(f.phi_max, phi);
  }
  f.residual_rms = counted ? std::sqrt(ss / static_cast<double>(counted)) : std::nan("");
  return f;
}

GammaSeries gamma_series(const CollisionEvent& e, const Path& path, const PotentialSpec& spec, GammaVariant variant) {
  const Subspace v = collision_subspace(spec, e);
  const MassMetric& m = spec.metric();
  const Relative rel = relative_motion(path, v, e.window_begin, e.window_end);
  GammaSeries g;
  const double alpha = spec.alpha();
  std::vector<double> rs;
  for (std::size_t j = e.window_begin; j <= e.window_end; ++j) {
    const std::size_t k = j - e.window_begin;
    const double r = rel.r[k];
    if (!(r > 0.0) || spec.is_singular(path.point(j))) continue;
    const double ang = 0.5 * (m.norm2(rel.wdot[k]) - rel.rdot[k] * rel.rdot[k]);
    const double u = spec.evaluate(path.time(j), path.point(j));
    const double val = variant == GammaVariant::Homogeneous
                           ? std::pow(r, alpha) * (ang - u)
                           : ang - (u + spec.log_coefficient(path.time(j)) * std::log(r));
    g.t.push_back(path.time(j));
    g.gamma.push_back(val);
    rs.push_back(r);
  }
  if (g.gamma.empty()) throw Error(ErrorCode::WindowTooShort, "no regular samples in the event window");
  std::size_t inner = 0;
  for (std::size_t k = 1; k < rs.size(); ++k) {
    if (rs[k] < rs[inner]) inner = k;
  }
  g.limit = g.gamma[inner];
  const double r_min = rs[inner];
  double last = 0.0, earlier = 0.0;
  bool finite = true;
  for (std::size_t k = 0; k < rs.size(); ++k) {
    finite = finite && std::isfinite(g.gamma[k]);
    if (rs[k] <= 10.0 * r_min) {
      last = std::max(last, std::abs(g.gamma[k]));
    } else {
      earlier = std::max(earlier, std::abs(g.gamma[k]));
    }
  }
  g.bounded = finite && last <= 2.0 * std::max(1.0, earlier);
  return g;
}

McGeheeSeries mcgehee_transform(const Path& path, const PotentialSpec& spec, std::size_t j0, std::size_t j1,
                                const Subspace& collision) {
  if (j1 <= j0 + 2 || j1 >= path.size()) throw Error(ErrorCode::WindowTooShort, "McGehee window needs at least 4 samples");
  if (spec.is_logarithmic()) throw Error(ErrorCode::InvalidArgument, "McGehee variables need a power-law potential");
  const MassMetric& m = spec.metric();
  const double alpha = spec.alpha();
  const Relative rel = relative_motion(path, collision, j0, j1);
  McGeheeSeries mc;
  std::vector<Vec> g;
  for (std::size_t j = j0; j <= j1; ++j) {
    const std::size_t k = j - j0;
    const double r = rel.r[k];
    if (!(r > 0.0)) throw SingularConfiguration("McGehee window reaches r = 0", static_cast<long>(j));
    const Vec s = rel.w[k] / r;
    const double ra = std::pow(r, alpha / 2.0);
    const Vec u = ra * (rel.wdot[k] - rel.rdot[k] * s);
    mc.t.push_back(path.time(j));
    mc.r.push_back(r);
    mc.s.push_back(s);
    mc.v.push_back(ra * rel.rdot[k]);
    mc.u.push_back(u);
    mc.max_us = std::max(mc.max_us, std::abs(m.dot(u, s)));
    const Vec w_back = r * s;
    const Vec wd_back = (mc.v.back() * s + u) / ra;
    const double err = std::max(m.norm(w_back - rel.w[k]) / r,
                                m.norm(wd_back - rel.wdot[k]) / std::max(m.norm(rel.wdot[k]), 1e-300));
    mc.max_reconstruction = std::max(mc.max_reconstruction, err);
    g.push_back(collision.complement(spec.gradient(path.time(j), path.point(j))));
  }
  const std::size_t n = mc.t.size();
  mc.tau.assign(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    const double fa = std::pow(mc.r[k - 1], -1.0 - alpha / 2.0), fb = std::pow(mc.r[k], -1.0 - alpha / 2.0);
    mc.tau[k] = mc.tau[k - 1] + 0.5 * (fa + fb) * (mc.t[k] - mc.t[k - 1]);
  }
  const std::vector<double> dr = differentiate(mc.tau, mc.r);
  const std::vector<double> dv = differentiate(mc.tau, mc.v);
  const int dim = static_cast<int>(mc.s.front().size());
  std::vector<Vec> ds(n, Vec(dim)), du(n, Vec(dim));
  for (int c = 0; c < dim; ++c) {
    std::vector<double> sc(n), uc(n);
    for (std::size_t k = 0; k < n; ++k) {
      sc[k] = mc.s[k][c];
      uc[k] = mc.u[k][c];
    }
    const auto dsc = differentiate(mc.tau, sc), duc = differentiate(mc.tau, uc);
    for (std::size_t k = 0; k < n; ++k) {
      ds[k][c] = dsc[k];
      du[k][c] = duc[k];
    }
  }
  // interior samples only: the one-sided end stencils are an order less accurate
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double r = mc.r[k], v = mc.v[k];
    const Vec& s = mc.s[k];
    const Vec& u = mc.u[k];
    const double u2 = m.norm2(u);
    const double scale = std::pow(r, 2.0 + alpha);
    const double gs = m.dot(g[k], s);
    const double rhs_v = 0.5 * alpha * v * v + u2 + scale * gs;
    const Vec rhs_u = (0.5 * alpha - 1.0) * v * u - u2 * s + scale * (g[k] - gs * s);
    mc.residual_r = std::max(mc.residual_r, std::abs(dr[k] - r * v) / (r * (1.0 + std::abs(v))));
    mc.residual_s = std::max(mc.residual_s, m.norm(ds[k] - u) / (1.0 + m.norm(u)));
    mc.residual_v = std::max(mc.residual_v, std::abs(dv[k] - rhs_v) / (1.0 + std::abs(rhs_v)));
    mc.residual_u = std::max(mc.residual_u, m.norm(du[k] - rhs_u) / (1.0 + m.norm(rhs_u)));
  }
  return mc;
}

CentralDistanceSeries central_config_distance(const CollisionEvent& e, const Path& path, const PotentialSpec& spec,
                                              const CentralConfigurationSet& set) {
  if (!set.degenerate && set.members.empty()) throw Error(ErrorCode::EmptyCentralSet, "central configuration set is empty");
  const Subspace v = collision_subspace(spec, e);
  const MassMetric& m = spec.metric();
  const bool rot = rotation_invariant(spec) && m.dim() > 1;
  const Relative rel = relative_motion(path, v, e.window_begin, e.window_end);
  CentralDistanceSeries out;
  for (std::size_t j = e.window_begin; j <= e.window_end; ++j) {
    const std::size_t k = j - e.window_begin;
    if (!(rel.r[k] > 0.0)) continue;
    const Vec s = rel.w[k] / rel.r[k];
    out.t.push_back(path.time(j));
    out.distance.push_back(distance_to_set(m, s, set, rot));
    out.tangential_gradient.push_back(
        spec.is_singular(s) ? kInf : m.norm(v.complement(spec.limit_tangential_gradient(path.time(j), s))));
  }
  const std::size_t n = out.distance.size();
  if (n < 2) throw Error(ErrorCode::WindowTooShort, "too few samples for a distance series");
  double first = 0.0, second = 0.0;
  for (std::size_t k = 0; k < n / 2; ++k) first += out.distance[k];
  for (std::size_t k = n / 2; k < n; ++k) second += out.distance[k];
  first /= static_cast<double>(n / 2);
  second /= static_cast<double>(n - n / 2);
  out.decreasing = second <= first;
  return out;
}

nlohmann::json to_json(const CollisionEvent& e) {
  std::vector<double> limit(e.limit.data(), e.limit.data() + e.limit.size());
  nlohmann::json j = {{"t_star", e.t_star},   {"side", to_string(e.side)}, {"kind", to_string(e.kind)},
                      {"sample", e.sample},   {"window", {e.window_begin, e.window_end}},
                      {"lattice_element", e.lattice_element}, {"limit", limit}};
  if (!e.clusters.empty()) j["clusters"] = e.clusters;
  return j;
}

nlohmann::json to_json(const SundmanFit& f) {
  nlohmann::json j = {{"t_star", f.t_star},
                      {"exponent", f.exponent},
                      {"exponent_ci", f.exponent_ci},
                      {"expected_exponent", f.expected_exponent},
                      {"K", f.K},
                      {"window", {f.window_t0, f.window_t1}},
                      {"window_r", {f.window_r0, f.window_r1}},
                      {"samples", f.samples},
                      {"residual_rms", f.residual_rms},
                      {"phi", {f.phi_min, f.phi_max}}};
  if (f.log_law) {
    j["M0"] = f.M0;
    j["law_ratio_end"] = f.law_ratio.empty() ? std::nan("") : f.law_ratio.back();
    j["energy_ratio_end"] = f.energy_ratio.empty() ? std::nan("") : f.energy_ratio.back();
  } else {
    j["b"] = f.b;
    j["b_kinetic"] = f.b_kinetic;
    j["b_error"] = f.b_error;
  }
  return j;
}

}  // namespace singlab
