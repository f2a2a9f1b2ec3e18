#include "singlab/piecewise_cubic.hpp"

#include <algorithm>
#include <cmath>

#include "singlab/error.hpp"

namespace singlab {

PiecewiseCubic::PiecewiseCubic(double constant)
    : knots_{0.0}, pieces_{Coeffs{constant, 0.0, 0.0, 0.0}}, constant_(true) {}

PiecewiseCubic::PiecewiseCubic(std::vector<double> knots, std::vector<Coeffs> pieces)
    : knots_(std::move(knots)), pieces_(std::move(pieces)) {
  if (knots_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "piecewise cubic needs at least one knot");
  }
  // one piece per knot interval, the last knot carries no piece of its own
  const std::size_t expected = knots_.size() == 1 ? 1 : knots_.size() - 1;
  if (pieces_.size() != expected) {
    throw Error(ErrorCode::InvalidArgument, "piecewise cubic: piece count does not match knots");
  }
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    if (!(knots_[k] > knots_[k - 1])) {
      throw Error(ErrorCode::InvalidArgument, "piecewise cubic: knots must be strictly increasing");
    }
  }
  constant_ = std::all_of(pieces_.begin(), pieces_.end(), [&](const Coeffs& c) {
    return c[1] == 0.0 && c[2] == 0.0 && c[3] == 0.0 && c[0] == pieces_.front()[0];
  });
}

PiecewiseCubic PiecewiseCubic::polynomial(const std::vector<double>& coeffs) {
  if (coeffs.empty() || coeffs.size() > 4) {
    throw Error(ErrorCode::InvalidArgument, "polynomial needs 1 to 4 coefficients");
  }
  Coeffs c{0.0, 0.0, 0.0, 0.0};
  std::copy(coeffs.begin(), coeffs.end(), c.begin());
  return PiecewiseCubic({0.0}, {c});
}

PiecewiseCubic PiecewiseCubic::hermite(std::vector<double> knots, const std::vector<double>& values,
                                       const std::vector<double>& slopes) {
  const std::size_t n = knots.size();
  if (n < 2 || values.size() != n || slopes.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "hermite: need >= 2 knots with matching values/slopes");
  }
  std::vector<Coeffs> pieces(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double h = knots[k + 1] - knots[k];
    const double y0 = values[k], y1 = values[k + 1];
    const double d0 = slopes[k], d1 = slopes[k + 1];
    const double c2 = (3.0 * (y1 - y0) / h - 2.0 * d0 - d1) / h;
    const double c3 = (d0 + d1 - 2.0 * (y1 - y0) / h) / (h * h);
    pieces[k] = {y0, d0, c2, c3};
  }
  return PiecewiseCubic(std::move(knots), std::move(pieces));
}

PiecewiseCubic PiecewiseCubic::spline(std::vector<double> knots, const std::vector<double>& values) {
  const std::size_t n = knots.size();
  if (n < 2 || values.size() != n) {
    throw Error(ErrorCode::InvalidArgument, "spline: need >= 2 knots with matching values");
  }
  if (n == 2) {
    const double slope = (values[1] - values[0]) / (knots[1] - knots[0]);
    return hermite(std::move(knots), values, {slope, slope});
  }
  // natural spline: solve the tridiagonal system for second derivatives
  std::vector<double> h(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) h[k] = knots[k + 1] - knots[k];
  std::vector<double> diag(n, 1.0), upper(n, 0.0), lower(n, 0.0), rhs(n, 0.0);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    lower[k] = h[k - 1];
    diag[k] = 2.0 * (h[k - 1] + h[k]);
    upper[k] = h[k];
    rhs[k] = 6.0 * ((values[k + 1] - values[k]) / h[k] - (values[k] - values[k - 1]) / h[k - 1]);
  }
  for (std::size_t k = 1; k < n; ++k) {
    const double w = lower[k] / diag[k - 1];
    diag[k] -= w * upper[k - 1];
    rhs[k] -= w * rhs[k - 1];
  }
  std::vector<double> m(n);
  m[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t k = n - 1; k-- > 0;) m[k] = (rhs[k] - upper[k] * m[k + 1]) / diag[k];

  std::vector<Coeffs> pieces(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double b = (values[k + 1] - values[k]) / h[k] - h[k] * (2.0 * m[k] + m[k + 1]) / 6.0;
    pieces[k] = {values[k], b, 0.5 * m[k], (m[k + 1] - m[k]) / (6.0 * h[k])};
  }
  return PiecewiseCubic(std::move(knots), std::move(pieces));
}

std::size_t PiecewiseCubic::locate(double t, double& u) const {
  std::size_t k = 0;
  if (pieces_.size() > 1) {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const auto idx = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - knots_.begin()) - 1));
    k = std::min(idx, pieces_.size() - 1);
  }
  u = t - knots_[k];
  return k;
}

double PiecewiseCubic::operator()(double t) const {
  double u = 0.0;
  const Coeffs& c = pieces_[locate(t, u)];
  return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
}

double PiecewiseCubic::derivative(double t) const {
  double u = 0.0;
  const Coeffs& c = pieces_[locate(t, u)];
  return c[1] + u * (2.0 * c[2] + 3.0 * u * c[3]);
}

}  // namespace singlab
