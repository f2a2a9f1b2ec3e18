#pragma once

#include <functional>
#include <string>
#include <vector>

#include "singlab/linalg.hpp"
#include "singlab/mass_metric.hpp"
#include "singlab/potential.hpp"

namespace singlab {

/// A trajectory sampled on a strictly increasing time grid, optionally with
/// exact velocities (integrator output). Immutable value type.
class Path {
 public:
  Path(MassMetric metric, std::vector<double> grid, std::vector<Vec> points, std::vector<Vec> velocities = {});

  static Path from_function(MassMetric metric, std::vector<double> grid,
                            const std::function<Vec(double)>& position,
                            const std::function<Vec(double)>& velocity = {});

  const MassMetric& metric() const noexcept { return metric_; }
  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<Vec>& points() const noexcept { return points_; }
  const std::vector<Vec>& stored_velocities() const noexcept { return velocities_; }
  bool has_velocities() const noexcept { return !velocities_.empty(); }

  std::size_t size() const noexcept { return grid_.size(); }
  double time(std::size_t j) const { return grid_[j]; }
  const Vec& point(std::size_t j) const { return points_[j]; }
  double duration() const { return grid_.back() - grid_.front(); }

  /// Nodal velocity: stored when available, else the nonuniform three-point
  /// centred difference (second-order one-sided at the ends).
  Vec velocity(std::size_t j) const;
  /// Same, always from finite differences of the positions.
  Vec difference_velocity(std::size_t j) const;

  /// Piecewise-linear interpolation (clamped outside the grid).
  Vec at(double t) const;

  /// Samples j0..j1 inclusive.
  Path slice(std::size_t j0, std::size_t j1) const;
  Path with_points(std::vector<Vec> points) const;
  /// Largest mass-metric distance between two samples.
  double diameter() const;

 private:
  MassMetric metric_;
  std::vector<double> grid_;
  std::vector<Vec> points_;
  std::vector<Vec> velocities_;
};

/// Uniform grid of n+1 points on [a, b].
std::vector<double> uniform_grid(double a, double b, std::size_t cells);

/// Nonuniform three-point derivative of a scalar series on the grid.
std::vector<double> differentiate(const std::vector<double>& grid, const std::vector<double>& values);
/// Nonuniform three-point second derivative; NaN at the two end samples.
std::vector<double> second_difference(const std::vector<double>& grid, const std::vector<double>& values);

double kinetic(const Path& path, std::size_t j);

/// Discrete action: the kinetic term of the piecewise-linear interpolant
/// (exact) plus h_j U(t_mid, x_mid) on every cell. Samples j0..j1.
double action(const Path& path, const PotentialSpec& spec);
double action(const Path& path, const PotentialSpec& spec, std::size_t j0, std::size_t j1);
/// Kinetic part only (potential disabled).
double kinetic_action(const Path& path);

double moment_of_inertia(const Path& path, std::size_t j);

struct InertiaSeries {
  std::vector<double> inertia;   ///< I
  std::vector<double> rate;      ///< dI/dt
  std::vector<double> accel;     ///< d^2 I/dt^2 (NaN at the ends when differenced)
};
InertiaSeries inertia_series(const Path& path);

struct EnergySeries {
  std::vector<double> h;         ///< K - U
  std::vector<double> residual;  ///< dh/dt + dU/dt (partial in t), dh/dt by differences
  std::string velocity_scheme;   ///< "stored" or "finite-difference"
};
EnergySeries energy_series(const Path& path, const PotentialSpec& spec);

struct MarginSeries {
  std::vector<double> margin;    ///< NaN where undefined
  double min = 0.0;
  std::size_t argmin = 0;
};
/// 1/2 I'' - 2h - (2 - alpha_tilde) U + C2 per interior sample.
MarginSeries lagrange_jacobi_margin(const Path& path, const PotentialSpec& spec);

struct RadialAngular {
  std::vector<double> r;
  std::vector<Vec> s;             ///< empty vector where r is below the floor
  std::vector<bool> collision;    ///< r < 1e-10 * diameter
};
RadialAngular radial_split(const Path& path);

/// Potential callbacks for the discrete action (value and metric gradient).
struct Lagrangian {
  std::function<double(double, const Vec&)> potential;
  std::function<Vec(double, const Vec&)> gradient;
  /// Optional additive penalty P(j, x_j) on nodes weighted by the trapezoid
  /// rule, with its coordinate gradient.
  std::function<double(std::size_t, const Vec&)> node_penalty;
  std::function<Vec(std::size_t, const Vec&)> node_penalty_gradient;

  static Lagrangian from_spec(const PotentialSpec& spec);
  static Lagrangian free_particle();
};

/// Value of the discrete action and its partial derivatives with respect to
/// every node (coordinate partials, not metric gradients).
double discrete_action(const MassMetric& metric, const std::vector<double>& grid, const std::vector<Vec>& points,
                       const Lagrangian& lagrangian, std::vector<Vec>* partials = nullptr);

/// Per-node Euler-Lagrange residual -M^{-1} dA/dx_j / ((h_{j-1} + h_j)/2), i.e.
/// the second difference minus the averaged force. Interior nodes only; the
/// end entries are zero.
std::vector<Vec> discrete_el_residual(const Path& path, const Lagrangian& lagrangian);
std::vector<Vec> discrete_el_residual(const Path& path, const PotentialSpec& spec);

}  // namespace singlab
