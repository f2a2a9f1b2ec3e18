#pragma once

#include <array>
#include <vector>

namespace singlab {

/// Cubic piecewise polynomial of time. Piece k covers [knots[k], knots[k+1]) and is
/// stored in the local variable u = t - knots[k]; the first and last pieces extend
/// to -inf and +inf. Values and first derivatives are exact.
class PiecewiseCubic {
 public:
  using Coeffs = std::array<double, 4>;

  PiecewiseCubic() : PiecewiseCubic(0.0) {}
  explicit PiecewiseCubic(double constant);
  PiecewiseCubic(std::vector<double> knots, std::vector<Coeffs> pieces);

  /// Single global cubic c0 + c1 t + c2 t^2 + c3 t^3 (fewer coefficients allowed).
  static PiecewiseCubic polynomial(const std::vector<double>& coeffs);

  /// C^2 natural cubic spline through (knots[k], values[k]).
  static PiecewiseCubic spline(std::vector<double> knots, const std::vector<double>& values);

  /// C^1 Hermite interpolant from values and slopes at the knots.
  static PiecewiseCubic hermite(std::vector<double> knots, const std::vector<double>& values,
                                const std::vector<double>& slopes);

  double operator()(double t) const;
  double derivative(double t) const;

  bool is_constant() const noexcept { return constant_; }
  const std::vector<double>& knots() const noexcept { return knots_; }
  const std::vector<Coeffs>& pieces() const noexcept { return pieces_; }

 private:
  std::size_t locate(double t, double& u) const;

  std::vector<double> knots_;
  std::vector<Coeffs> pieces_;
  bool constant_ = true;
};

}  // namespace singlab
