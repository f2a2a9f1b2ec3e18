#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "singlab/path.hpp"
#include "singlab/potential.hpp"
#include "singlab/subspace.hpp"

namespace singlab {

/// q(t) = zeta t^{2/(2+alpha)} for t >= 0.
struct BlowUp {
  Vec zeta;
  double alpha;

  /// Zero-energy normalization |zeta|^{2+alpha} = ((2+alpha)^2 / 2) U~(s) along
  /// the unit direction s of the homogeneous potential.
  static BlowUp parabolic(const PotentialSpec& homogeneous, const Vec& direction);
  Vec at(double t) const;
  Vec velocity(double t) const;
};

/// v(t) = delta for |t| <= T - |delta|, a unit-speed ramp to 0 on
/// T - |delta| <= |t| <= T, and 0 beyond.
struct StandardVariation {
  Vec delta;
  double T;
  const MassMetric* metric;

  StandardVariation(Vec delta, double T, const MassMetric& metric);
  double size() const;
  Vec at(double t) const;
  Vec rate(double t) const;
};

enum class QuadScheme {
  Nested,   ///< outer average over the angle, inner improper integral
  Swapped,  ///< inner angle average first, then the improper integral
};

/// Phi_alpha(theta), theta the angle between zeta and -delta. +inf at theta = 0
/// for alpha >= 1. The Nested scheme uses tanh-sinh, Swapped uses adaptive
/// Gauss-Kronrod with different variable changes.
double phi_alpha(double alpha, double theta, QuadScheme scheme = QuadScheme::Nested, double tol = 1e-12);

/// (1/2 pi) int_0^{2 pi} Phi_alpha.
double average_phi(double alpha, QuadScheme scheme = QuadScheme::Nested);

/// S(zeta, delta) = int_0^inf U~(zeta t^p + delta) - U~(zeta t^p) dt, p = 2/(2+alpha),
/// for the homogeneous potential `limit`. +inf when the displaced ray runs into
/// Delta and the singularity is not integrable.
double displacement_potential(const PotentialSpec& limit, const Vec& zeta, const Vec& delta, double tol = 1e-11);

/// A circle of unit directions in a 2-plane.
struct Circle {
  Vec e1, e2;
  static Circle of(const Subspace& plane);
  Vec at(double theta) const;
  /// Angle of the projection of x onto the plane.
  double angle_of(const MassMetric& metric, const Vec& x) const;
};

struct CircleAverage {
  double value = 0.0;
  double error = 0.0;
  double min_value = 0.0;    ///< smallest sampled value
  double argmin_angle = 0.0;
  Vec argmin;                ///< unit direction achieving min_value
  std::size_t nodes = 0;
  std::string scheme;        ///< "trapezoid" or "tanh-sinh"
};

/// Average of f over the circle. Offset trapezoid with doubling; when that does
/// not settle to tol, tanh-sinh on the arcs between the angles where f may be
/// singular. The arcs stop `cut` short of each such angle and the missing ends
/// are filled in from a local model A + B log(phi) (singular_order 0) or
/// A + B phi^{-singular_order}, fitted at cut and 2 cut.
CircleAverage circle_average(const std::function<double(double)>& f, std::vector<double> singular_angles,
                             std::size_t n_nodes = 256, double tol = 1e-9, double singular_order = 0.0,
                             double cut = 1e-6);

/// Angles of the unit directions d in the plane for which zeta rho + lambda d
/// hits Delta for some rho, lambda > 0.
std::vector<double> singular_angles(const PotentialSpec& spec, const Vec& zeta, const Circle& circle);

/// Circle average of S(zeta, .) over the unit circle of the plane.
CircleAverage averaged_s_on_circle(const PotentialSpec& limit, const Vec& zeta, const Subspace& plane,
                                   std::size_t n_nodes = 256);

/// base + v on the base grid refined with the variation's breakpoints.
Path standard_variation_path(const Path& base, const StandardVariation& var);

/// Delta A over [0, T] for the blow-up: the exact kinetic change on the ramp plus
/// the potential change by quadrature.
double action_differential(const BlowUp& q, const PotentialSpec& limit, const StandardVariation& var);
/// Discrete action difference on the refined grid (midpoint cells keep the
/// collision node out of the potential). Throws PathThroughSingularity.
double action_differential(const Path& base, const PotentialSpec& spec, const StandardVariation& var);

/// (1/2 pi) int log(y + 2 z cos theta) = log((y + sqrt(y^2 - 4 z^2)) / 2); y >= 2z > 0.
double log_mean_value(double y, double z);
double log_mean_value_quadrature(double y, double z);
/// (1/2 pi z) int_{|d| = z} log|x + d|^2 = max(log|x|^2, log z^2) for planar x.
double circle_average_log(const Eigen::Vector2d& x, double z);
double circle_average_log_quadrature(const Eigen::Vector2d& x, double z);

/// Radial ejection from a total collision at t = 0 under U = -M log r, coming
/// to rest at radius R: t(r) = R sqrt(pi / 2M) erfc(sqrt(log(R / r))).
struct LogEjection {
  double M = 1.0;
  double R = 1.0;

  double time_to_rest() const;
  double radius(double t) const;
  double speed(double t) const;
};

struct LogBoundReport {
  std::vector<double> delta;
  std::vector<double> potential;   ///< circle-averaged potential differential
  std::vector<double> kinetic;     ///< circle-averaged kinetic differential
  std::vector<double> total;
  double a = 0.0;                  ///< total / |delta| ~ a + c sqrt(-log |delta|)
  double c = 0.0;
  double c_potential = 0.0;        ///< same fit for the potential part alone
  double kinetic_exponent = 0.0;   ///< log-log slope of the kinetic part
  bool potential_negative = false;
};

/// Circle-averaged action differentials of standard variations in the plane W
/// around a collision path x(t), t in [0, T], collision at t = 0.
LogBoundReport averaged_log_action_bound(const std::function<Vec(double)>& base, const PotentialSpec& spec,
                                         const std::vector<double>& deltas, const Subspace& plane, double T);

nlohmann::json to_json(const CircleAverage& avg);
nlohmann::json to_json(const LogBoundReport& report);

}  // namespace singlab
