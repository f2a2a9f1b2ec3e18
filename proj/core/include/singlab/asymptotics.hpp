#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "singlab/central_configurations.hpp"
#include "singlab/clusters.hpp"
#include "singlab/collision_event.hpp"
#include "singlab/integrator.hpp"
#include "singlab/path.hpp"
#include "singlab/potential.hpp"

namespace singlab {

struct DetectOptions {
  /// A sample is a collision candidate when dist(x, Delta) <= r_rel * max_j dist(x_j, Delta).
  double r_rel = 1e-6;
};

/// Local minima of the distance to Delta that fall below the threshold. Throws
/// AmbiguousEvent when the potential blows up at a path end without the
/// configuration converging.
std::vector<CollisionEvent> detect_collisions(const Path& path, const PotentialSpec& spec, const DetectOptions& options = {});
std::vector<CollisionEvent> detect_collisions(const OdeSolution& solution, const PotentialSpec& spec,
                                              const DetectOptions& options = {});

/// True when no event sample falls inside another event's window.
bool collisions_isolated(const std::vector<CollisionEvent>& events);

/// The collision subspace of the event's lattice element.
Subspace collision_subspace(const PotentialSpec& spec, const CollisionEvent& event);

struct FitOptions {
  /// The fit uses samples with r <= start_fraction * r(window_begin).
  double start_fraction = 1e-2;
  double min_decades = 2.0;
  /// Samples closer than this to t* (relative to 1 + |t*|) are dropped: the time
  /// grid cannot resolve them.
  double min_time_gap = 1e-11;
  /// ExponentMismatch is raised beyond this distance from 2/(2+alpha).
  double exponent_band = 5e-2;
};

struct SundmanFit {
  double t_star = 0.0;
  double exponent = 0.0;
  double exponent_ci = 0.0;       ///< two standard errors of the regression slope
  double expected_exponent = 0.0;
  double K = 0.0;
  double b = 0.0;                 ///< limit of r^alpha U (homogeneous)
  double b_kinetic = 0.0;         ///< limit of rdot^2 r^alpha / 2
  double b_error = 0.0;           ///< spread of the Richardson sequence
  double M0 = 0.0;                ///< logarithmic coefficient M(t*)
  double window_t0 = 0.0, window_t1 = 0.0;
  double window_r0 = 0.0, window_r1 = 0.0;
  std::size_t samples = 0;
  double residual_rms = 0.0;
  double phi_min = 0.0, phi_max = 0.0;   ///< phi = -rdot r^{alpha/2} over the window
  // logarithmic fits only
  std::vector<double> r;                ///< radii of the window samples
  std::vector<double> law_ratio;        ///< r / [(t*-t) sqrt(-2 M0 log(t*-t))]
  std::vector<double> energy_ratio;     ///< rdot^2 / (-2 log r)
  bool log_law = false;
};

/// Sundman fit r ~ [K (t* - t)]^p for an alpha-homogeneous leading term: a
/// log-log regression jointly with a one-dimensional refinement of t*, plus
/// Richardson-extrapolated limits of r^alpha U and rdot^2 r^alpha / 2.
SundmanFit fit_sundman(const CollisionEvent& event, const Path& path, const PotentialSpec& spec,
                       const FitOptions& options = {});
/// Logarithmic law: t* from the radial energy integral, the series of the law
/// ratio and of rdot^2 / (-2 log r).
SundmanFit fit_sundman_log(const CollisionEvent& event, const Path& path, const PotentialSpec& spec,
                           const FitOptions& options = {});

/// Value of the quantity at radius r by linear interpolation in log r, with the
/// samples sorted by radius.
double value_at_radius(const std::vector<double>& r, const std::vector<double>& q, double radius);

enum class GammaVariant { Homogeneous, Logarithmic };

struct GammaSeries {
  std::vector<double> t;
  std::vector<double> gamma;
  double limit = 0.0;   ///< extrapolated limit (expected -b)
  bool bounded = false; ///< finite and without growth on the final decade of r
};
GammaSeries gamma_series(const CollisionEvent& event, const Path& path, const PotentialSpec& spec, GammaVariant variant);

struct McGeheeSeries {
  std::vector<double> t, tau, r, v;
  std::vector<Vec> s, u;
  double max_us = 0.0;              ///< max |u.s|
  double max_reconstruction = 0.0;  ///< relative error of (x, xdot) rebuilt from (r, s, v, u)
  /// Max residuals of r' = r v, s' = u, and the v, u equations (tau derivatives).
  double residual_r = 0.0, residual_s = 0.0, residual_v = 0.0, residual_u = 0.0;
};
/// McGehee variables of the w-component on the samples j0..j1, with
/// d tau = r^{-1-alpha/2} dt accumulated by the trapezoid rule.
McGeheeSeries mcgehee_transform(const Path& path, const PotentialSpec& spec, std::size_t j0, std::size_t j1,
                                const Subspace& collision);

struct CentralDistanceSeries {
  std::vector<double> t, distance, tangential_gradient;
  bool decreasing = false;  ///< distance on the last half of the window below the first half
};
CentralDistanceSeries central_config_distance(const CollisionEvent& event, const Path& path, const PotentialSpec& spec,
                                              const CentralConfigurationSet& set);

nlohmann::json to_json(const CollisionEvent& event);
nlohmann::json to_json(const SundmanFit& fit);

}  // namespace singlab
