#pragma once

#include <vector>

#include "singlab/linalg.hpp"
#include "singlab/piecewise_cubic.hpp"

namespace singlab {

/// The mass-weighted inner product x.y = sum_i m_i <x_i, y_i> on R^{n d}.
///
/// The metric itself uses the constant masses. Optional mass functions m_i(t)
/// describe time-varying couplings in the potential; when they are absent the
/// couplings are the constant masses.
class MassMetric {
 public:
  MassMetric(std::vector<double> masses, int dim,
             std::vector<PiecewiseCubic> mass_functions = {});

  static MassMetric unit(int bodies, int dim) {
    return MassMetric(std::vector<double>(static_cast<std::size_t>(bodies), 1.0), dim);
  }

  int bodies() const noexcept { return static_cast<int>(masses_.size()); }
  int dim() const noexcept { return dim_; }
  int size() const noexcept { return bodies() * dim_; }

  double mass(int i) const { return masses_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& masses() const noexcept { return masses_; }

  /// Per-coordinate weights, length n*d.
  const Vec& weights() const noexcept { return weights_; }
  const Vec& sqrt_weights() const noexcept { return sqrt_weights_; }

  double dot(const Vec& a, const Vec& b) const { return (a.array() * weights_.array() * b.array()).sum(); }
  double norm2(const Vec& a) const { return dot(a, a); }
  double norm(const Vec& a) const;

  /// Converts coordinate partial derivatives into the metric gradient M^{-1} dU/dx.
  Vec raise(const Vec& partials) const { return (partials.array() / weights_.array()).matrix(); }
  /// Inverse of raise: M g.
  Vec lower(const Vec& gradient) const { return (gradient.array() * weights_.array()).matrix(); }

  bool time_varying() const noexcept { return !mass_functions_.empty(); }
  double coupling(int i, double t) const;
  double coupling_rate(int i, double t) const;
  const std::vector<PiecewiseCubic>& mass_functions() const noexcept { return mass_functions_; }

  auto body(const Vec& x, int i) const { return x.segment(i * dim_, dim_); }
  auto body(Vec& x, int i) const { return x.segment(i * dim_, dim_); }

  /// Centre of mass (length d).
  Vec centre_of_mass(const Vec& x) const;

  bool operator==(const MassMetric& other) const {
    return dim_ == other.dim_ && masses_ == other.masses_;
  }

 private:
  std::vector<double> masses_;
  int dim_;
  std::vector<PiecewiseCubic> mass_functions_;
  Vec weights_;
  Vec sqrt_weights_;
};

}  // namespace singlab
