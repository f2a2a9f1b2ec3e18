#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "singlab/path.hpp"
#include "singlab/potential.hpp"

namespace singlab {

struct IntegratorOptions {
  double tol = 1e-12;             ///< absolute and relative local error tolerance
  double collision_tol = 1e-12;   ///< halt when U > 1 / collision_tol
  double r_floor = 1e-10;         ///< halt when dist(x, Delta) < r_floor
  double initial_step = 1e-3;
  std::size_t max_steps = 2'000'000;
  /// When non-empty, samples are recorded exactly at these times (monotone in
  /// the integration direction) instead of at every accepted step.
  std::vector<double> output_times;
};

struct OdeEvent {
  std::string kind;               ///< "CollisionApproach"
  double t = 0.0;
  double potential = 0.0;
  double distance = 0.0;          ///< distance to Delta at the halt
  std::string trigger;            ///< "potential", "distance" or "step-underflow"
};

struct OdeSolution {
  MassMetric metric;
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;
  std::vector<OdeEvent> events;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  bool halted = false;            ///< stopped early on a collision approach

  std::size_t size() const noexcept { return t.size(); }
  /// The samples as a path with exact velocities, in increasing time.
  Path path() const;
};

/// Integrates x'' = grad U(t, x) (metric gradient) from (x0, v0) at t0 towards
/// t1 (either direction) with an adaptive Runge-Kutta-Fehlberg 7(8) pair.
/// Throws SingularConfiguration for x0 on Delta, StepUnderflow when the step
/// collapses away from a collision and NonFiniteState on overflow.
OdeSolution integrate(const PotentialSpec& spec, const Vec& x0, const Vec& v0, double t0, double t1,
                      const IntegratorOptions& options = {});

/// Fixed-step velocity Verlet, for long-time sanity checks on autonomous specs.
OdeSolution integrate_leapfrog(const PotentialSpec& spec, const Vec& x0, const Vec& v0, double t0, double t1,
                               std::size_t steps);

/// Energy K - U along the solution.
std::vector<double> solution_energy(const OdeSolution& sol, const PotentialSpec& spec);

/// The parabolic homothetic orbit x(t) = [K (t* - t)]^{2/(2+alpha)} s on the
/// grid (all grid times must be below t*), K = ((2+alpha)/2) sqrt(2 U~(s)).
/// s is normalized to unit inertia. Throws NotCentralConfiguration when the
/// tangential gradient of U~ at s exceeds `tol`, InvalidArgument when the potential
/// is not homogeneous along s.
Path homothetic_collision_orbit(const PotentialSpec& spec, const Vec& direction, double t_star,
                                const std::vector<double>& grid, double tol = 1e-8);

nlohmann::json events_to_json(const std::vector<OdeEvent>& events);

}  // namespace singlab
