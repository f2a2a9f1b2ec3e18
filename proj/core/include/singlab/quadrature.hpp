#pragma once

#include <cstddef>
#include <functional>

namespace singlab::quad {

/// Integrand with accurate distances to both ends: f(x, x - a, b - x).
using EndpointIntegrand = std::function<double(double, double, double)>;
using Integrand = std::function<double(double)>;

struct Estimate {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

/// Tanh-sinh on [a, b]; tolerates integrable endpoint singularities. Throws
/// QuadratureFailure when the level-difference estimate exceeds sqrt(tol) (1 + L1).
Estimate tanh_sinh(const EndpointIntegrand& f, double a, double b, double tol);
Estimate tanh_sinh(const Integrand& f, double a, double b, double tol);

/// Adaptive 31-point Gauss-Kronrod on [a, b]. Throws QuadratureFailure when the
/// error estimate exceeds 100 tol (1 + L1).
Estimate gauss_kronrod(const Integrand& f, double a, double b, double tol, unsigned max_depth = 20);

/// Fixed 20-point Gauss-Legendre on [a, b].
double gauss_legendre(const Integrand& f, double a, double b);

/// Average of a 2 pi-periodic function by the trapezoid rule, doubling from n
/// nodes (offset by half a node from `shift`) until two rounds agree to tol.
/// Returns false in `converged` when max_nodes is reached first.
Estimate periodic_trapezoid(const Integrand& f, double shift, std::size_t n, double tol, std::size_t max_nodes,
                            bool* converged);

}  // namespace singlab::quad
