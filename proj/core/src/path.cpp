#include "singlab/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "singlab/error.hpp"

namespace singlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Weights (a, b, c) of f'(t_j) ~ a f_{j-1} + b f_j + c f_{j+1} for steps hm, hp.
void centred_weights(double hm, double hp, double& a, double& b, double& c) {
  a = -hp / (hm * (hm + hp));
  b = (hp - hm) / (hm * hp);
  c = hm / (hp * (hm + hp));
}

// f'(t_0) from f_0, f_1, f_2 with steps h1 = t1 - t0, h2 = t2 - t1.
void forward_weights(double h1, double h2, double& a, double& b, double& c) {
  a = -(2.0 * h1 + h2) / (h1 * (h1 + h2));
  b = (h1 + h2) / (h1 * h2);
  c = -h1 / (h2 * (h1 + h2));
}

template <class T>
T derivative_at(const std::vector<double>& g, const std::vector<T>& f, std::size_t j) {
  const std::size_t n = g.size();
  if (n == 2) return (f[1] - f[0]) / (g[1] - g[0]);
  double a, b, c;
  if (j == 0) {
    forward_weights(g[1] - g[0], g[2] - g[1], a, b, c);
    return a * f[0] + b * f[1] + c * f[2];
  }
  if (j == n - 1) {
    forward_weights(g[n - 2] - g[n - 1], g[n - 3] - g[n - 2], a, b, c);
    return a * f[n - 1] + b * f[n - 2] + c * f[n - 3];
  }
  centred_weights(g[j] - g[j - 1], g[j + 1] - g[j], a, b, c);
  return a * f[j - 1] + b * f[j] + c * f[j + 1];
}

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw Error(ErrorCode::DegenerateGrid, "a path needs at least two samples");
  for (std::size_t j = 1; j < grid.size(); ++j) {
    if (!(grid[j] > grid[j - 1])) {
      std::ostringstream os;
      os << "grid not strictly increasing at index " << j;
      throw Error(ErrorCode::DegenerateGrid, os.str());
    }
  }
}

}  // namespace

Path::Path(MassMetric metric, std::vector<double> grid, std::vector<Vec> points, std::vector<Vec> velocities)
    : metric_(std::move(metric)), grid_(std::move(grid)), points_(std::move(points)), velocities_(std::move(velocities)) {
  check_grid(grid_);
  if (points_.size() != grid_.size()) throw Error(ErrorCode::GridMismatch, "point count differs from grid length");
  if (!velocities_.empty() && velocities_.size() != grid_.size()) {
    throw Error(ErrorCode::GridMismatch, "velocity count differs from grid length");
  }
  for (std::size_t j = 0; j < points_.size(); ++j) {
    if (points_[j].size() != metric_.size()) throw Error(ErrorCode::InvalidArgument, "configuration has the wrong length");
    if (!points_[j].allFinite()) throw Error(ErrorCode::NonFiniteState, "path sample " + std::to_string(j) + " is not finite");
  }
}

Path Path::from_function(MassMetric metric, std::vector<double> grid, const std::function<Vec(double)>& position,
                         const std::function<Vec(double)>& velocity) {
  std::vector<Vec> points, velocities;
  points.reserve(grid.size());
  for (double t : grid) points.push_back(position(t));
  if (velocity) {
    velocities.reserve(grid.size());
    for (double t : grid) velocities.push_back(velocity(t));
  }
  return Path(std::move(metric), std::move(grid), std::move(points), std::move(velocities));
}

Vec Path::velocity(std::size_t j) const {
  if (has_velocities()) return velocities_[j];
  return difference_velocity(j);
}

Vec Path::difference_velocity(std::size_t j) const { return derivative_at(grid_, points_, j); }

Vec Path::at(double t) const {
  if (t <= grid_.front()) return points_.front();
  if (t >= grid_.back()) return points_.back();
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - grid_.begin()) - 1;
  const double w = (t - grid_[j]) / (grid_[j + 1] - grid_[j]);
  return (1.0 - w) * points_[j] + w * points_[j + 1];
}

Path Path::slice(std::size_t j0, std::size_t j1) const {
  if (j1 <= j0 || j1 >= size()) throw Error(ErrorCode::InvalidArgument, "bad slice bounds");
  std::vector<double> g(grid_.begin() + static_cast<long>(j0), grid_.begin() + static_cast<long>(j1) + 1);
  std::vector<Vec> p(points_.begin() + static_cast<long>(j0), points_.begin() + static_cast<long>(j1) + 1);
  std::vector<Vec> v;
  if (has_velocities()) v.assign(velocities_.begin() + static_cast<long>(j0), velocities_.begin() + static_cast<long>(j1) + 1);
  return Path(metric_, std::move(g), std::move(p), std::move(v));
}

Path Path::with_points(std::vector<Vec> points) const { return Path(metric_, grid_, std::move(points)); }

double Path::diameter() const {
  // the bounding radius about the first sample bounds the diameter within a factor 2;
  // an exact O(N^2) scan is only worth it for short paths
  double d = 0.0;
  if (size() <= 2000) {
    for (std::size_t a = 0; a < size(); ++a)
      for (std::size_t b = a + 1; b < size(); ++b) d = std::max(d, metric_.norm(points_[a] - points_[b]));
    return d;
  }
  for (const auto& p : points_) d = std::max(d, metric_.norm(p - points_.front()));
  return d;
}

std::vector<double> uniform_grid(double a, double b, std::size_t cells) {
  if (cells == 0 || !(b > a)) throw Error(ErrorCode::DegenerateGrid, "uniform grid needs b > a and cells > 0");
  std::vector<double> g(cells + 1);
  for (std::size_t j = 0; j <= cells; ++j) g[j] = a + (b - a) * static_cast<double>(j) / static_cast<double>(cells);
  g.back() = b;
  return g;
}

std::vector<double> differentiate(const std::vector<double>& grid, const std::vector<double>& values) {
  check_grid(grid);
  if (values.size() != grid.size()) throw Error(ErrorCode::GridMismatch, "series length differs from grid");
  std::vector<double> d(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) d[j] = derivative_at(grid, values, j);
  return d;
}

std::vector<double> second_difference(const std::vector<double>& grid, const std::vector<double>& f) {
  check_grid(grid);
  if (f.size() != grid.size()) throw Error(ErrorCode::GridMismatch, "series length differs from grid");
  std::vector<double> d(grid.size(), kNaN);
  for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
    const double hm = grid[j] - grid[j - 1], hp = grid[j + 1] - grid[j];
    d[j] = 2.0 * ((f[j + 1] - f[j]) / hp - (f[j] - f[j - 1]) / hm) / (hm + hp);
  }
  return d;
}

double kinetic(const Path& path, std::size_t j) { return 0.5 * path.metric().norm2(path.velocity(j)); }

Lagrangian Lagrangian::from_spec(const PotentialSpec& spec) {
  Lagrangian l;
  l.potential = [&spec](double t, const Vec& x) { return spec.evaluate(t, x); };
  l.gradient = [&spec](double t, const Vec& x) { return spec.gradient(t, x); };
  return l;
}

Lagrangian Lagrangian::free_particle() {
  Lagrangian l;
  l.potential = [](double, const Vec&) { return 0.0; };
  l.gradient = [](double, const Vec& x) { return Vec::Zero(x.size()); };
  return l;
}

double discrete_action(const MassMetric& metric, const std::vector<double>& grid, const std::vector<Vec>& points,
                       const Lagrangian& lag, std::vector<Vec>* partials) {
  const std::size_t n = grid.size();
  if (points.size() != n) throw Error(ErrorCode::GridMismatch, "point count differs from grid length");
  if (partials) partials->assign(n, Vec::Zero(metric.size()));
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double h = grid[j + 1] - grid[j];
    const Vec dx = points[j + 1] - points[j];
    const double tm = 0.5 * (grid[j] + grid[j + 1]);
    const Vec xm = 0.5 * (points[j] + points[j + 1]);
    double u;
    try {
      u = lag.potential(tm, xm);
    } catch (const SingularConfiguration& e) {
      throw SingularConfiguration(std::string("cell midpoint on the collision set: ") + e.what(), static_cast<long>(j));
    }
    total += 0.5 * metric.norm2(dx) / h + h * u;
    if (partials) {
      const Vec kin = metric.lower(dx) / h;
      const Vec force = 0.5 * h * metric.lower(lag.gradient(tm, xm));
      (*partials)[j] += force - kin;
      (*partials)[j + 1] += force + kin;
    }
  }
  if (lag.node_penalty) {
    for (std::size_t j = 0; j < n; ++j) {
      const double w = 0.5 * ((j > 0 ? grid[j] - grid[j - 1] : 0.0) + (j + 1 < n ? grid[j + 1] - grid[j] : 0.0));
      total += w * lag.node_penalty(j, points[j]);
      if (partials) (*partials)[j] += w * lag.node_penalty_gradient(j, points[j]);
    }
  }
  return total;
}

double action(const Path& path, const PotentialSpec& spec) { return action(path, spec, 0, path.size() - 1); }

double action(const Path& path, const PotentialSpec& spec, std::size_t j0, std::size_t j1) {
  if (j1 <= j0 || j1 >= path.size()) throw Error(ErrorCode::InvalidArgument, "bad action range");
  const auto& g = path.grid();
  const auto& p = path.points();
  std::vector<double> grid(g.begin() + static_cast<long>(j0), g.begin() + static_cast<long>(j1) + 1);
  std::vector<Vec> pts(p.begin() + static_cast<long>(j0), p.begin() + static_cast<long>(j1) + 1);
  try {
    return discrete_action(path.metric(), grid, pts, Lagrangian::from_spec(spec));
  } catch (const SingularConfiguration& e) {
    throw SingularConfiguration(e.what(), e.index() + static_cast<long>(j0));
  }
}

double kinetic_action(const Path& path) {
  return discrete_action(path.metric(), path.grid(), path.points(), Lagrangian::free_particle());
}

double moment_of_inertia(const Path& path, std::size_t j) { return path.metric().norm2(path.point(j)); }

InertiaSeries inertia_series(const Path& path) {
  InertiaSeries s;
  const std::size_t n = path.size();
  s.inertia.resize(n);
  for (std::size_t j = 0; j < n; ++j) s.inertia[j] = moment_of_inertia(path, j);
  if (path.has_velocities()) {
    s.rate.resize(n);
    for (std::size_t j = 0; j < n; ++j) s.rate[j] = 2.0 * path.metric().dot(path.point(j), path.stored_velocities()[j]);
    s.accel = differentiate(path.grid(), s.rate);
  } else {
    s.rate = differentiate(path.grid(), s.inertia);
    s.accel = second_difference(path.grid(), s.inertia);
  }
  return s;
}

EnergySeries energy_series(const Path& path, const PotentialSpec& spec) {
  EnergySeries e;
  e.velocity_scheme = path.has_velocities() ? "stored" : "finite-difference";
  const std::size_t n = path.size();
  e.h.resize(n);
  std::vector<double> rate(n);
  for (std::size_t j = 0; j < n; ++j) {
    try {
      e.h[j] = kinetic(path, j) - spec.evaluate(path.time(j), path.point(j));
      rate[j] = spec.partial_t(path.time(j), path.point(j));
    } catch (const SingularConfiguration& err) {
      throw SingularConfiguration(err.what(), static_cast<long>(j));
    }
  }
  e.residual = differentiate(path.grid(), e.h);
  // along x'' = grad U the energy obeys dh/dt = -dU/dt
  for (std::size_t j = 0; j < n; ++j) e.residual[j] += rate[j];
  return e;
}

MarginSeries lagrange_jacobi_margin(const Path& path, const PotentialSpec& spec) {
  const InertiaSeries in = inertia_series(path);
  const EnergySeries en = energy_series(path, spec);
  const double at = spec.alpha_tilde();
  const double c2 = spec.constants().c2;
  MarginSeries m;
  m.margin.assign(path.size(), kNaN);
  m.min = std::numeric_limits<double>::infinity();
  // with stored velocities I'' comes from differencing I' and is defined at the ends too,
  // but one-sided ends are only first-order accurate there; keep interior samples only
  for (std::size_t j = 1; j + 1 < path.size(); ++j) {
    if (!std::isfinite(in.accel[j])) continue;
    const double u = spec.evaluate(path.time(j), path.point(j));
    m.margin[j] = 0.5 * in.accel[j] - 2.0 * en.h[j] - (2.0 - at) * u + c2;
    if (m.margin[j] < m.min) {
      m.min = m.margin[j];
      m.argmin = j;
    }
  }
  return m;
}

RadialAngular radial_split(const Path& path) {
  RadialAngular out;
  const std::size_t n = path.size();
  const double floor = 1e-10 * path.diameter();
  out.r.resize(n);
  out.s.resize(n);
  out.collision.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = path.metric().norm(path.point(j));
    out.r[j] = r;
    out.collision[j] = r < floor || r == 0.0;
    if (r > 0.0 && !out.collision[j]) out.s[j] = path.point(j) / r;
  }
  return out;
}

std::vector<Vec> discrete_el_residual(const Path& path, const Lagrangian& lagrangian) {
  std::vector<Vec> partials;
  discrete_action(path.metric(), path.grid(), path.points(), lagrangian, &partials);
  const auto& g = path.grid();
  std::vector<Vec> res(path.size(), Vec::Zero(path.metric().size()));
  for (std::size_t j = 1; j + 1 < path.size(); ++j) {
    const double hbar = 0.5 * (g[j + 1] - g[j - 1]);
    res[j] = -path.metric().raise(partials[j]) / hbar;
  }
  return res;
}

std::vector<Vec> discrete_el_residual(const Path& path, const PotentialSpec& spec) {
  return discrete_el_residual(path, Lagrangian::from_spec(spec));
}

}  // namespace singlab
