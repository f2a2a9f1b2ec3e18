#include "singlab/variations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "singlab/error.hpp"
#include "singlab/quadrature.hpp"

namespace singlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 2)");
}

// rho^{alpha/2} ((rho - c)^2 + s^2)^{-alpha/2} - rho^{-alpha/2} with rho - c passed in.
double phi_kernel(double alpha, double rho, double rho_minus_c, double s) {
  return std::pow(rho, 0.5 * alpha) * std::pow(std::hypot(rho_minus_c, s), -alpha) - std::pow(rho, -0.5 * alpha);
}

// rho [((rho - c)^2 + s^2)^{-alpha/2} rho^{alpha} - 1] from inv = 1/rho, for
// rho >= 2 without cancellation; tends to alpha c.
double phi_far_scaled(double alpha, double inv, double c) {
  if (inv == 0.0) return alpha * c;
  const double eps = inv * inv - 2.0 * c * inv;
  return std::expm1(-0.5 * alpha * std::log1p(eps)) / inv;
}

// Below this cosine the peak at rho = c is too wide to need its own knot.
constexpr double kPeakCos = 0.5;

double phi_nested(double alpha, double theta, double tol) {
  const double c = std::cos(theta), s = std::sin(theta);
  if (s == 0.0 && c > 0.0 && alpha >= 1.0) return kInf;
  double total = 0.0;
  if (c > kPeakCos) {
    total += quad::tanh_sinh([&](double x, double, double db) { return phi_kernel(alpha, x, -db, s); }, 0.0, c, tol).value;
    total += quad::tanh_sinh([&](double x, double da, double) { return phi_kernel(alpha, x, da, s); }, c, 2.0, tol).value;
  } else {
    total += quad::tanh_sinh([&](double x) { return phi_kernel(alpha, x, x - c, s); }, 0.0, 2.0, tol).value;
  }
  // rho = 2 u^{-2/alpha}; the Jacobian leaves 2^{-alpha/2} q rho E(rho)
  const double q = 2.0 / alpha;
  const double pref = std::pow(2.0, -0.5 * alpha) * q;
  total += quad::tanh_sinh([&](double u) { return pref * phi_far_scaled(alpha, 0.5 * std::pow(u, q), c); }, 0.0, 1.0, tol)
               .value;
  return 0.5 * (alpha + 2.0) * total;
}

double phi_swapped(double alpha, double theta, double tol) {
  // adaptive Gauss-Kronrod piles up roundoff below this
  tol = std::max(tol, 1e-10);
  const double c = std::cos(theta), s = std::sin(theta);
  if (s == 0.0 && c > 0.0 && alpha >= 1.0) return kInf;
  auto gk = [&](auto&& f, double a, double b) { return quad::gauss_kronrod(f, a, b, tol, 15).value; };
  // rho = b w^k near 0 flattens the rho^{-alpha/2} endpoint.
  auto from_zero = [&](double b) {
    const double k = 4.0 / (2.0 - alpha);
    return gk(
        [&](double w) {
          if (w == 0.0) return 0.0;
          const double rho = b * std::pow(w, k);
          return phi_kernel(alpha, rho, rho - c, s) * b * k * std::pow(w, k - 1.0);
        },
        0.0, 1.0);
  };
  // rho = c + sign s sinh v turns the peak into (s cosh v)^{-alpha}; for s = 0,
  // rho = c + sign len w^k instead.
  auto from_peak = [&](double sign, double len) {
    if (s == 0.0) {
      const double k = 2.0 / (1.0 - alpha);
      return gk(
          [&](double w) {
            if (w == 0.0) return 0.0;
            const double d = len * std::pow(w, k);
            const double rho = c + sign * d;
            return (std::pow(rho, 0.5 * alpha) * std::pow(w, k * (1.0 - alpha) - 1.0) * std::pow(len, -alpha) -
                    std::pow(rho, -0.5 * alpha) * std::pow(w, k - 1.0)) *
                   len * k;
          },
          0.0, 1.0);
    }
    return gk(
        [&](double v) {
          const double ch = std::cosh(v);
          const double rho = c + sign * s * std::sinh(v);
          return std::pow(rho, 0.5 * alpha) * std::pow(s * ch, 1.0 - alpha) - std::pow(rho, -0.5 * alpha) * s * ch;
        },
        0.0, std::asinh(len / s));
  };
  double total = 0.0;
  if (c > kPeakCos) {
    total += from_zero(0.5 * c) + from_peak(-1.0, 0.5 * c) + from_peak(1.0, 2.0 - c);
  } else {
    total += from_zero(2.0);
  }
  // rho = 2 u^{-4/alpha}
  const double q = 4.0 / alpha;
  const double pref = std::pow(2.0, -0.5 * alpha) * q;
  total += gk([&](double u) { return pref * u * phi_far_scaled(alpha, 0.5 * std::pow(u, q), c); }, 0.0, 1.0);
  return 0.5 * (alpha + 2.0) * total;
}

// (1/pi) int_0^pi (rho^2 - 2 rho cos th + 1)^{-alpha/2} dth for rho < 2, with
// gap = |1 - rho| exact.
double angle_average_near(double alpha, double rho, double gap, double tol) {
  double head = 0.0;
  const double xmax = std::sin(kPi / 4.0);
  if (gap == 0.0) {
    if (alpha >= 1.0) return kInf;
    head = quad::tanh_sinh([&](double x) { return std::pow(2.0 * x * std::sqrt(rho), -alpha) * 2.0 / std::sqrt(1.0 - x * x); },
                           0.0, xmax, tol)
               .value;
  } else if (const double cc = gap / (2.0 * std::sqrt(rho)); cc > 1.0) {
    head = quad::gauss_kronrod(
               [&](double th) {
                 const double sn = std::sin(0.5 * th);
                 return std::pow(gap * gap + 4.0 * rho * sn * sn, -0.5 * alpha);
               },
               0.0, 0.5 * kPi, tol, 15)
               .value;
  } else {
    // x = sin(th/2) = cc sinh v turns gap^2 + 4 rho x^2 into (gap cosh v)^2.
    const double vmax = std::asinh(xmax / cc);
    head = quad::gauss_kronrod(
               [&](double v) {
                 const double ch = std::cosh(v);
                 const double x = cc * std::sinh(v);
                 return std::pow(gap * ch, 1.0 - alpha) / (std::sqrt(rho) * std::sqrt(1.0 - x * x));
               },
               0.0, vmax, tol, 15)
               .value;
  }
  const double tail = quad::gauss_kronrod(
                          [&](double th) {
                            const double sn = std::sin(0.5 * th);
                            return std::pow(gap * gap + 4.0 * rho * sn * sn, -0.5 * alpha);
                          },
                          0.5 * kPi, kPi, tol, 15)
                          .value;
  return (head + tail) / kPi;
}

double angle_average_far(double alpha, double rho, double tol) {
  return quad::gauss_kronrod(
             [&](double th) {
               return std::pow(rho, -alpha) * std::expm1(-0.5 * alpha * std::log1p((1.0 - 2.0 * rho * std::cos(th)) / (rho * rho)));
             },
             0.0, kPi, tol, 15)
             .value /
         kPi;
}

// Distance-to-generator data for the displaced ray zeta rho + delta.
struct RayGeometry {
  std::vector<double> breaks;
  bool hits = false;
};

RayGeometry ray_geometry(const PotentialSpec& spec, const Vec& zeta, const Vec& delta, double rho_max) {
  const MassMetric& m = spec.metric();
  RayGeometry g;
  const double scale = m.norm(delta);
  for (const Subspace& v : spec.singular_subspaces()) {
    const Vec a = v.complement(zeta), b = v.complement(delta);
    const double aa = m.norm2(a);
    if (aa == 0.0) continue;
    const double rho = -m.dot(a, b) / aa;
    if (!(rho > 0.0 && rho < rho_max)) continue;
    g.breaks.push_back(rho);
    if (m.norm(rho * a + b) <= 1e-13 * (scale + rho * std::sqrt(aa))) g.hits = true;
  }
  std::sort(g.breaks.begin(), g.breaks.end());
  return g;
}

// (1/p) int_0^{rho_max} rho^{alpha/2} [U(zeta rho + delta) - U(zeta rho)] drho.
double s_integral(const PotentialSpec& limit, const Vec& zeta, const Vec& delta, double rho_max, double tol) {
  const double alpha = limit.alpha();
  require_alpha(alpha);
  const MassMetric& m = limit.metric();
  const double dn = m.norm(delta);
  if (dn == 0.0 || rho_max <= 0.0) return 0.0;
  const double dz = limit.singular_distance(zeta);
  if (!(dz > 0.0)) throw Error(ErrorCode::InvalidArgument, "blow-up direction lies on the collision set");
  const double uz = limit.evaluate(0.0, zeta);
  const double inv_p = 0.5 * (2.0 + alpha);

  const RayGeometry geo = ray_geometry(limit, zeta, delta, rho_max);
  if (geo.hits && alpha >= 1.0) return kInf;

  // Homogeneity: U(zeta rho + delta) - U(zeta rho) = rho^{-alpha} int_0^1 grad U(zeta + s delta / rho) . delta / rho ds.
  auto diff_scaled = [&](double inv_rho) {
    return quad::gauss_legendre([&](double s) { return m.dot(limit.gradient(0.0, zeta + (s * inv_rho) * delta), delta); },
                                0.0, 1.0);
  };
  const double far = 4.0 * dn / dz;
  auto direct = [&](double rho, const Vec& x) {
    return inv_p * (std::pow(rho, 0.5 * alpha) * limit.evaluate(0.0, x) - std::pow(rho, -0.5 * alpha) * uz);
  };

  std::vector<double> knots{0.0};
  for (double b : geo.breaks) {
    if (b < far) knots.push_back(b);
  }
  const double r0 = std::min(far, rho_max);
  if (r0 > knots.back()) knots.push_back(r0);
  // Near a closest approach the point is rebuilt from the knot's own point, so
  // rounding in zeta rho + delta does not add noise to the peak, and the
  // distance to the knot is d = w sinh v with w the width of the peak.
  const double zn = m.norm(zeta);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i], b = knots[i + 1];
    const bool left_peak = i > 0, right_peak = i + 2 < knots.size();
    double lo = a, hi = b;
    auto peak_half = [&](double knot, double sign, double len) {
      const Vec xk = zeta * knot + delta;
      const double w = limit.singular_distance(xk) / zn;
      if (!(w > 0.0)) {
        return quad::tanh_sinh(
                   [&](double, double da, double) { return direct(knot + sign * da, xk + (sign * da) * zeta); }, 0.0,
                   len, tol)
            .value;
      }
      return quad::tanh_sinh(
                 [&](double v) {
                   const double d = w * std::sinh(v);
                   return direct(knot + sign * d, xk + (sign * d) * zeta) * w * std::cosh(v);
                 },
                 0.0, std::asinh(len / w), tol)
          .value;
    };
    if (left_peak) {
      lo = right_peak ? 0.5 * (a + b) : a + 0.5 * (b - a);
      total += peak_half(a, 1.0, lo - a);
    }
    if (right_peak) {
      hi = 0.5 * (a + b);
      total += peak_half(b, -1.0, b - hi);
    }
    if (hi > lo) total += quad::tanh_sinh([&](double rho) { return direct(rho, zeta * rho + delta); }, lo, hi, tol).value;
  }
  if (rho_max > far) {
    // rho = R u^{-2/alpha}; the integrand becomes (1/p)(2/alpha) R^{-alpha/2} J.
    const double umin = std::isinf(rho_max) ? 0.0 : std::pow(far / rho_max, 0.5 * alpha);
    const double q = 2.0 / alpha;
    const double pref = inv_p * q * std::pow(far, -0.5 * alpha);
    total += quad::gauss_kronrod([&](double u) { return pref * diff_scaled(std::pow(u, q) / far); }, umin, 1.0, tol).value;
  }
  return total;
}

}  // namespace

BlowUp BlowUp::parabolic(const PotentialSpec& homogeneous, const Vec& direction) {
  const double alpha = homogeneous.alpha();
  require_alpha(alpha);
  const double n = homogeneous.metric().norm(direction);
  if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "zero blow-up direction");
  const Vec s = direction / n;
  const double us = homogeneous.evaluate(0.0, s);
  const double r = std::pow(0.5 * (2.0 + alpha) * (2.0 + alpha) * us, 1.0 / (2.0 + alpha));
  return BlowUp{r * s, alpha};
}

Vec BlowUp::at(double t) const { return zeta * std::pow(t, 2.0 / (2.0 + alpha)); }

Vec BlowUp::velocity(double t) const {
  const double p = 2.0 / (2.0 + alpha);
  return zeta * (p * std::pow(t, p - 1.0));
}

StandardVariation::StandardVariation(Vec d, double t, const MassMetric& m) : delta(std::move(d)), T(t), metric(&m) {
  if (!(T > size())) throw Error(ErrorCode::InvalidArgument, "variation needs T > |delta|");
}

double StandardVariation::size() const { return metric->norm(delta); }

Vec StandardVariation::at(double t) const {
  const double a = std::abs(t), n = size();
  if (a <= T - n) return delta;
  if (a <= T) return delta * ((T - a) / n);
  return Vec::Zero(delta.size());
}

Vec StandardVariation::rate(double t) const {
  const double a = std::abs(t), n = size();
  if (a > T - n && a < T) return delta * ((t > 0 ? -1.0 : 1.0) / n);
  return Vec::Zero(delta.size());
}

double phi_alpha(double alpha, double theta, QuadScheme scheme, double tol) {
  require_alpha(alpha);
  theta = std::abs(std::remainder(theta, 2.0 * kPi));
  return scheme == QuadScheme::Nested ? phi_nested(alpha, theta, tol) : phi_swapped(alpha, theta, tol);
}

double average_phi(double alpha, QuadScheme scheme) {
  require_alpha(alpha);
  if (scheme == QuadScheme::Nested) {
    // theta = w^2 tames the blow-up of Phi at theta = 0.
    const double w1 = std::sqrt(kPi);
    return quad::gauss_kronrod([&](double w) { return w == 0.0 ? 0.0 : 2.0 * w * phi_nested(alpha, w * w, 1e-12); }, 0.0,
                               w1, 1e-9, 15)
               .value /
           kPi;
  }
  const double inv_p = 0.5 * (2.0 + alpha);
  double total = quad::tanh_sinh(
                     [&](double rho, double, double db) {
                       return std::pow(rho, 0.5 * alpha) * angle_average_near(alpha, rho, db, 1e-11) - std::pow(rho, -0.5 * alpha);
                     },
                     0.0, 1.0, 1e-9)
                     .value;
  total += quad::tanh_sinh(
               [&](double rho, double da, double) {
                 return std::pow(rho, 0.5 * alpha) * angle_average_near(alpha, rho, da, 1e-11) - std::pow(rho, -0.5 * alpha);
               },
               1.0, 2.0, 1e-9)
               .value;
  const double q = 2.0 / alpha;
  total += quad::gauss_kronrod(
               [&](double u) {
                 if (u == 0.0) return 0.0;
                 const double rho = 2.0 * std::pow(u, -q);
                 return std::pow(rho, 0.5 * alpha) * angle_average_far(alpha, rho, 1e-11) * 2.0 * q * std::pow(u, -q - 1.0);
               },
               0.0, 1.0, 1e-10, 15)
               .value;
  return inv_p * total;
}

double displacement_potential(const PotentialSpec& limit, const Vec& zeta, const Vec& delta, double tol) {
  return s_integral(limit, zeta, delta, kInf, tol);
}

Circle Circle::of(const Subspace& plane) {
  if (plane.dim() != 2) throw Error(ErrorCode::InvalidArgument, "variation plane must be two-dimensional");
  const Mat b = plane.basis();
  return Circle{b.col(0), b.col(1)};
}

Vec Circle::at(double theta) const { return std::cos(theta) * e1 + std::sin(theta) * e2; }

double Circle::angle_of(const MassMetric& metric, const Vec& x) const {
  return std::atan2(metric.dot(x, e2), metric.dot(x, e1));
}

std::vector<double> singular_angles(const PotentialSpec& spec, const Vec& zeta, const Circle& circle) {
  const MassMetric& m = spec.metric();
  std::vector<double> out;
  for (const Subspace& v : spec.singular_subspaces()) {
    const Vec a = v.complement(zeta);
    const double aa = m.norm2(a);
    if (aa == 0.0) continue;
    const Vec a1 = v.complement(circle.e1), a2 = v.complement(circle.e2);
    // components of the circle's image orthogonal to a must vanish
    const Vec b1 = a1 - (m.dot(a1, a) / aa) * a, b2 = a2 - (m.dot(a2, a) / aa) * a;
    const double scale = 1e-10 * (m.norm(a1) + m.norm(a2));
    double theta;
    if (m.norm(b1) <= scale && m.norm(b2) <= scale) {
      theta = std::atan2(-m.dot(a2, a), -m.dot(a1, a));
    } else {
      // cos th b1 + sin th b2 = 0 needs b1 and b2 parallel
      const double n1 = m.norm(b1), n2 = m.norm(b2);
      const double cross2 = n1 * n1 * n2 * n2 - std::pow(m.dot(b1, b2), 2);
      if (cross2 > std::pow(scale * (n1 + n2 + scale), 2)) continue;
      theta = n1 >= n2 ? std::atan2(-n1 * n1, m.dot(b1, b2)) : std::atan2(-m.dot(b1, b2), n2 * n2);
      if (m.norm(std::cos(theta) * b1 + std::sin(theta) * b2) > scale) theta += kPi;
    }
    // theta and theta + pi both solve it; keep the one pointing against a
    if (m.dot(std::cos(theta) * a1 + std::sin(theta) * a2, a) >= 0.0) theta += kPi;
    if (m.dot(std::cos(theta) * a1 + std::sin(theta) * a2, a) >= 0.0) continue;
    out.push_back(std::remainder(theta, 2.0 * kPi));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }), out.end());
  return out;
}

CircleAverage circle_average(const std::function<double(double)>& f, std::vector<double> angles, std::size_t n_nodes,
                             double tol, double singular_order, double cut) {
  CircleAverage out;
  double best = kInf, best_angle = 0.0;
  auto g = [&](double th) {
    const double v = f(th);
    if (v < best) {
      best = v;
      best_angle = th;
    }
    return v;
  };
  const double shift = angles.empty() ? 0.0 : angles.front();
  bool converged = false;
  quad::Estimate est;
  // a known singular angle defeats the trapezoid rule, so skip it
  if (angles.empty()) {
    try {
      est = quad::periodic_trapezoid(g, shift, n_nodes, tol, 4 * n_nodes, &converged);
    } catch (const Error&) {
      converged = false;
    }
  }
  if (converged && std::isfinite(est.value)) {
    out.value = est.value;
    out.error = est.error;
    out.nodes = 4 * n_nodes;
    out.scheme = "trapezoid";
  } else {
    if (angles.empty()) angles.push_back(0.0);
    std::sort(angles.begin(), angles.end());
    angles.push_back(angles.front() + 2.0 * kPi);
    // local model on the last `cut` of an arc ending at a singular angle
    auto end_piece = [&](double f1, double f2) {
      double b;
      if (singular_order == 0.0) {
        b = (f2 - f1) / std::log(2.0);
        const double a = f1 - b * std::log(cut);
        return cut * (a + b * (std::log(cut) - 1.0));
      }
      const double k = singular_order;
      b = (f1 - f2) / (std::pow(cut, -k) - std::pow(2.0 * cut, -k));
      const double a = f1 - b * std::pow(cut, -k);
      return cut * a + b * std::pow(cut, 1.0 - k) / (1.0 - k);
    };
    double total = 0.0, err = 0.0;
    for (std::size_t i = 0; i + 1 < angles.size(); ++i) {
      const double a = angles[i], b = angles[i + 1];
      if (b - a <= 4.0 * cut) continue;
      const auto e = quad::tanh_sinh(quad::Integrand(g), a + cut, b - cut, tol);
      total += e.value + end_piece(g(a + cut), g(a + 2.0 * cut)) + end_piece(g(b - cut), g(b - 2.0 * cut));
      err += e.error;
    }
    out.value = total / (2.0 * kPi);
    out.error = err / (2.0 * kPi);
    out.scheme = "tanh-sinh";
  }
  out.min_value = best;
  out.argmin_angle = std::remainder(best_angle, 2.0 * kPi);
  return out;
}

CircleAverage averaged_s_on_circle(const PotentialSpec& limit, const Vec& zeta, const Subspace& plane, std::size_t n_nodes) {
  const Circle circle = Circle::of(plane);
  const double order = limit.alpha() > 1.0 ? limit.alpha() - 1.0 : 0.0;
  CircleAverage avg = circle_average([&](double th) { return displacement_potential(limit, zeta, circle.at(th)); },
                                     singular_angles(limit, zeta, circle), n_nodes, 1e-9, order);
  avg.argmin = circle.at(avg.argmin_angle);
  return avg;
}

Path standard_variation_path(const Path& base, const StandardVariation& var) {
  std::vector<double> grid = base.grid();
  const double n = var.size();
  for (double t : {-var.T, -(var.T - n), var.T - n, var.T}) {
    if (t > grid.front() && t < grid.back()) grid.push_back(t);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<Vec> pts;
  pts.reserve(grid.size());
  for (double t : grid) pts.push_back(base.at(t) + var.at(t));
  return Path(base.metric(), std::move(grid), std::move(pts));
}

double action_differential(const BlowUp& q, const PotentialSpec& limit, const StandardVariation& var) {
  const MassMetric& m = limit.metric();
  const double n = var.size(), T = var.T;
  if (n == 0.0) return 0.0;
  const Vec unit = var.delta / n;
  const double kinetic = 0.5 * n - m.dot(unit, q.at(T) - q.at(T - n));
  const double p = 2.0 / (2.0 + q.alpha);
  const double plateau = s_integral(limit, q.zeta, var.delta, std::pow(T - n, p), 1e-11);
  if (std::isinf(plateau)) return kInf;
  const double ramp =
      quad::gauss_kronrod(
          [&](double t) {
            const Vec x = q.at(t);
            const double len = T - t;
            return quad::gauss_legendre([&](double s) { return m.dot(limit.gradient(0.0, x + (s * len) * unit), unit); }, 0.0,
                                        len);
          },
          T - n, T, 1e-10, 10)
          .value;
  return kinetic + plateau + ramp;
}

double action_differential(const Path& base, const PotentialSpec& spec, const StandardVariation& var) {
  const Path varied = standard_variation_path(base, var);
  std::vector<Vec> pts;
  pts.reserve(varied.size());
  for (double t : varied.grid()) pts.push_back(base.at(t));
  const Path refined = varied.with_points(std::move(pts));
  double a1;
  try {
    a1 = action(varied, spec);
  } catch (const SingularConfiguration& e) {
    throw Error(ErrorCode::PathThroughSingularity, std::string("varied path: ") + e.what());
  }
  return a1 - action(refined, spec);
}

namespace {

// (1/pi) int_0^pi log(gap + 4 z sin^2(phi/2)) with phi = pi - theta, gap = y - 2z.
double log_cos_quadrature(double gap, double z) {
  return quad::tanh_sinh(
             [&](double, double, double db) {
               const double s = std::sin(0.5 * db);
               if (gap == 0.0) return std::log(4.0 * z) + 2.0 * std::log(s);
               return std::log(gap + 4.0 * z * s * s);
             },
             0.0, kPi, 1e-13)
             .value /
         kPi;
}

}  // namespace

double log_mean_value(double y, double z) {
  if (!(z >= 0.0) || !(y >= 2.0 * z) || !(y > 0.0)) throw Error(ErrorCode::DomainError, "log mean value needs y >= 2z >= 0, y > 0");
  return std::log(0.5 * (y + std::sqrt((y - 2.0 * z) * (y + 2.0 * z))));
}

double log_mean_value_quadrature(double y, double z) {
  if (!(z >= 0.0) || !(y >= 2.0 * z) || !(y > 0.0)) throw Error(ErrorCode::DomainError, "log mean value needs y >= 2z >= 0, y > 0");
  if (z == 0.0) return std::log(y);
  return log_cos_quadrature(y - 2.0 * z, z);
}

double circle_average_log(const Eigen::Vector2d& x, double z) {
  if (!(z >= 0.0)) throw Error(ErrorCode::DomainError, "circle radius must be nonnegative");
  const double r = x.norm();
  if (r == 0.0 && z == 0.0) throw Error(ErrorCode::DomainError, "log of zero");
  return 2.0 * std::log(std::max(r, z));
}

double circle_average_log_quadrature(const Eigen::Vector2d& x, double z) {
  if (!(z >= 0.0)) throw Error(ErrorCode::DomainError, "circle radius must be nonnegative");
  const double r = x.norm();
  if (r == 0.0 && z == 0.0) throw Error(ErrorCode::DomainError, "log of zero");
  if (r == 0.0 || z == 0.0) return 2.0 * std::log(std::max(r, z));
  return log_cos_quadrature((r - z) * (r - z), r * z);
}

double LogEjection::time_to_rest() const { return R * std::sqrt(kPi / (2.0 * M)); }

double LogEjection::radius(double t) const {
  const double tr = time_to_rest();
  if (!(t >= 0.0 && t <= tr)) throw Error(ErrorCode::DomainError, "time outside the ejection");
  if (t == 0.0) return 0.0;
  const double s = boost::math::erfc_inv(t / tr);
  return R * std::exp(-s * s);
}

double LogEjection::speed(double t) const {
  const double r = radius(t);
  if (r == 0.0) return kInf;
  return std::sqrt(2.0 * M * std::log(R / r));
}

LogBoundReport averaged_log_action_bound(const std::function<Vec(double)>& base, const PotentialSpec& spec,
                                         const std::vector<double>& deltas, const Subspace& plane, double T) {
  const MassMetric& m = spec.metric();
  const Circle circle = Circle::of(plane);
  LogBoundReport rep;
  for (double d : deltas) {
    if (!(d > 0.0 && d < T)) throw Error(ErrorCode::InvalidArgument, "need 0 < |delta| < T");
    auto averaged = [&](double t) {
      if (t <= 0.0) return 0.0;
      const Vec x = base(t);
      // the integrand grows like log(1 / dist); below this the neglected piece
      // is of order dist log(dist) in t
      if (spec.singular_distance(x) < 1e-12 * d || spec.is_singular(x)) return 0.0;
      const double len = t <= T - d ? d : T - t;
      const double u0 = spec.evaluate(t, x);
      const auto avg = circle_average([&](double th) { return spec.evaluate(t, x + len * circle.at(th)) - u0; },
                                      singular_angles(spec, x, circle), 64, 1e-11);
      return avg.value;
    };
    // split where |x(t)| crosses |delta|: the averaged integrand has a kink there
    std::vector<double> knots{0.0};
    double lo = 0.0, hi = T - d;
    if (m.norm(base(hi)) > d) {
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (m.norm(base(mid)) < d ? lo : hi) = mid;
      }
      knots.push_back(0.5 * (lo + hi));
    }
    knots.push_back(T - d);
    knots.push_back(T);
    double pot = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      pot += quad::tanh_sinh(quad::Integrand(averaged), knots[i], knots[i + 1], 1e-10).value;
    }
    const Vec jump = base(T) - base(T - d);
    const double kin =
        quad::periodic_trapezoid([&](double th) { return 0.5 * d - m.dot(circle.at(th), jump); }, 0.0, 16, 1e-14, 64, nullptr)
            .value;
    rep.delta.push_back(d);
    rep.potential.push_back(pot);
    rep.kinetic.push_back(kin);
    rep.total.push_back(pot + kin);
  }
  // least squares of y = a + c sqrt(-log d)
  auto fit = [&](const std::vector<double>& vals, double& a, double& c) {
    const std::size_t n = vals.size();
    if (n < 2) return;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::sqrt(-std::log(rep.delta[i])), y = vals[i] / rep.delta[i];
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    c = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    a = (sy - c * sx) / n;
  };
  double unused = 0.0;
  fit(rep.total, rep.a, rep.c);
  fit(rep.potential, unused, rep.c_potential);
  rep.potential_negative = std::all_of(rep.potential.begin(), rep.potential.end(), [](double v) { return v < 0.0; });
  if (rep.delta.size() >= 2) {
    const std::size_t n = rep.delta.size() - 1;
    rep.kinetic_exponent = std::log(rep.kinetic[n] / rep.kinetic[0]) / std::log(rep.delta[n] / rep.delta[0]);
  }
  return rep;
}

nlohmann::json to_json(const CircleAverage& avg) {
  nlohmann::json j = {{"value", avg.value},         {"error", avg.error},   {"min_value", avg.min_value},
                      {"argmin_angle", avg.argmin_angle}, {"nodes", avg.nodes}, {"scheme", avg.scheme}};
  if (avg.argmin.size() > 0) j["argmin"] = std::vector<double>(avg.argmin.data(), avg.argmin.data() + avg.argmin.size());
  return j;
}

nlohmann::json to_json(const LogBoundReport& r) {
  return {{"delta", r.delta},
          {"potential", r.potential},
          {"kinetic", r.kinetic},
          {"total", r.total},
          {"a", r.a},
          {"c", r.c},
          {"c_potential", r.c_potential},
          {"kinetic_exponent", r.kinetic_exponent},
          {"potential_negative", r.potential_negative}};
}

}  // namespace singlab
