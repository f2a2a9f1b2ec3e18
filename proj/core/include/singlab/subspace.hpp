#pragma once

#include "singlab/linalg.hpp"
#include "singlab/mass_metric.hpp"

namespace singlab {

/// A linear subspace of R^{n d} with a basis orthonormal in the mass metric.
///
/// Internally the basis is kept in mass-weighted coordinates y = M^{1/2} x, where
/// the metric is Euclidean; projections, distances and intersections are computed
/// there.
class Subspace {
 public:
  /// Span of the columns of `vectors` (x coordinates). Rank is detected with `tol`.
  static Subspace from_span(const MassMetric& metric, const Mat& vectors, double tol = 1e-12);
  /// Kernel {x : C x = 0} of the rows of `constraints`.
  static Subspace from_constraints(const MassMetric& metric, const Mat& constraints, double tol = 1e-12);
  /// {x : x_i = x_j} for bodies i != j.
  static Subspace coincidence(const MassMetric& metric, int i, int j);
  static Subspace zero(const MassMetric& metric);
  static Subspace whole(const MassMetric& metric);

  int dim() const noexcept { return static_cast<int>(q_.cols()); }
  int ambient() const noexcept { return static_cast<int>(q_.rows()); }
  int codim() const noexcept { return ambient() - dim(); }

  /// Mass-orthonormal basis in x coordinates (columns).
  Mat basis() const;
  /// Euclidean-orthonormal basis in weighted coordinates.
  const Mat& weighted_basis() const noexcept { return q_; }

  Vec project(const Vec& x) const;
  Vec complement(const Vec& x) const { return x - project(x); }
  double distance(const Vec& x) const;

  /// Coordinates c of the projection with x = basis() * c.
  Vec coordinates(const Vec& x) const;
  Vec from_coordinates(const Vec& c) const;

  Subspace intersect(const Subspace& other, double tol = 1e-10) const;
  Subspace orthogonal_complement() const;

  /// True when every vector of `other` lies in this subspace (within tol).
  bool contains(const Subspace& other, double tol = 1e-9) const;
  bool same_as(const Subspace& other, double tol = 1e-9) const {
    return dim() == other.dim() && contains(other, tol);
  }

  const Vec& sqrt_weights() const noexcept { return sqrt_w_; }

 private:
  Subspace(Vec sqrt_w, Mat q) : sqrt_w_(std::move(sqrt_w)), q_(std::move(q)) {}
  static Subspace from_weighted_span(const Vec& sqrt_w, const Mat& y_vectors, double tol);

  Vec sqrt_w_;
  Mat q_;
};

}  // namespace singlab
