#include "singlab/subspace.hpp"

#include <Eigen/SVD>

#include "singlab/error.hpp"

namespace singlab {

Subspace Subspace::from_weighted_span(const Vec& sqrt_w, const Mat& y, double tol) {
  const auto m = sqrt_w.size();
  if (y.cols() == 0) return Subspace(sqrt_w, Mat(m, 0));
  Eigen::JacobiSVD<Mat> svd(y, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double scale = sv.size() > 0 ? std::max(1.0, sv(0)) : 1.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol * scale) ++rank;
  return Subspace(sqrt_w, svd.matrixU().leftCols(rank));
}

Subspace Subspace::from_span(const MassMetric& metric, const Mat& vectors, double tol) {
  if (vectors.rows() != metric.size()) {
    throw Error(ErrorCode::InvalidArgument, "subspace spanning vectors have the wrong length");
  }
  const Mat y = metric.sqrt_weights().asDiagonal() * vectors;
  return from_weighted_span(metric.sqrt_weights(), y, tol);
}

Subspace Subspace::from_constraints(const MassMetric& metric, const Mat& constraints, double tol) {
  const auto m = metric.size();
  if (constraints.cols() != m) {
    throw Error(ErrorCode::InvalidArgument, "constraint rows have the wrong length");
  }
  if (constraints.rows() == 0) return whole(metric);
  // C x = 0 with x = W^{-1/2} y  =>  (C W^{-1/2}) y = 0
  const Mat cy = constraints * metric.sqrt_weights().cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Mat> svd(cy, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double scale = sv.size() > 0 ? std::max(1.0, sv(0)) : 1.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol * scale) ++rank;
  return Subspace(metric.sqrt_weights(), svd.matrixV().rightCols(m - rank));
}

Subspace Subspace::coincidence(const MassMetric& metric, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= metric.bodies() || j >= metric.bodies()) {
    throw Error(ErrorCode::InvalidArgument, "coincidence subspace needs two distinct bodies");
  }
  const int d = metric.dim();
  Mat c = Mat::Zero(d, metric.size());
  for (int k = 0; k < d; ++k) {
    c(k, i * d + k) = 1.0;
    c(k, j * d + k) = -1.0;
  }
  return from_constraints(metric, c);
}

Subspace Subspace::zero(const MassMetric& metric) { return Subspace(metric.sqrt_weights(), Mat(metric.size(), 0)); }

Subspace Subspace::whole(const MassMetric& metric) {
  return Subspace(metric.sqrt_weights(), Mat::Identity(metric.size(), metric.size()));
}

Mat Subspace::basis() const { return sqrt_w_.cwiseInverse().asDiagonal() * q_; }

Vec Subspace::project(const Vec& x) const {
  if (dim() == 0) return Vec::Zero(x.size());
  const Vec y = sqrt_w_.cwiseProduct(x);
  const Vec py = q_ * (q_.transpose() * y);
  return py.cwiseQuotient(sqrt_w_);
}

double Subspace::distance(const Vec& x) const {
  const Vec y = sqrt_w_.cwiseProduct(x);
  if (dim() == 0) return y.norm();
  return (y - q_ * (q_.transpose() * y)).norm();
}

Vec Subspace::coordinates(const Vec& x) const { return q_.transpose() * sqrt_w_.cwiseProduct(x); }

Vec Subspace::from_coordinates(const Vec& c) const { return (q_ * c).cwiseQuotient(sqrt_w_); }

Subspace Subspace::intersect(const Subspace& other, double tol) const {
  if (dim() == 0 || other.dim() == 0) return Subspace(sqrt_w_, Mat(ambient(), 0));
  // {Q1 a : (I - Q2 Q2^T) Q1 a = 0}
  const Mat residual = q_ - other.q_ * (other.q_.transpose() * q_);
  Eigen::JacobiSVD<Mat> svd(residual, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > tol) ++rank;
  const Mat kernel = svd.matrixV().rightCols(dim() - rank);
  return from_weighted_span(sqrt_w_, q_ * kernel, tol);
}

Subspace Subspace::orthogonal_complement() const {
  const auto m = ambient();
  if (dim() == 0) return Subspace(sqrt_w_, Mat::Identity(m, m));
  const Mat p = Mat::Identity(m, m) - q_ * q_.transpose();
  return from_weighted_span(sqrt_w_, p, 1e-10);
}

bool Subspace::contains(const Subspace& other, double tol) const {
  if (other.dim() == 0) return true;
  if (other.dim() > dim()) return false;
  if (dim() == 0) return false;
  const Mat residual = other.q_ - q_ * (q_.transpose() * other.q_);
  return residual.norm() <= tol * std::sqrt(static_cast<double>(other.dim()));
}

}  // namespace singlab
