#include "singlab/quadrature.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "singlab/error.hpp"

namespace singlab::quad {

namespace {

void check(const Estimate& e, double limit, const char* what) {
  if (!std::isfinite(e.value) || e.error > limit) {
    char buf[128];
    std::snprintf(buf, sizeof buf, ": error estimate %.3e for value %.17g", e.error, e.value);
    throw Error(ErrorCode::QuadratureFailure, what + std::string(buf));
  }
}

}  // namespace

Estimate tanh_sinh(const EndpointIntegrand& f, double a, double b, double tol) {
  if (!(b > a)) throw Error(ErrorCode::InvalidArgument, "tanh-sinh needs a < b");
  const double len = b - a;
  boost::math::quadrature::tanh_sinh<double> ts(15);
  Estimate e;
  try {
    e.value = ts.integrate(
        [&](double, double xc) {
          // rebuild x from the endpoint distance, which Boost keeps exact
          if (xc < 0.0) {
            const double da = -xc;
            return f(a + da, da, len - da);
          }
          return f(b - xc, len - xc, xc);
        },
        a, b, tol, &e.error, &e.l1);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& ex) {
    throw Error(ErrorCode::QuadratureFailure, ex.what());
  }
  // the estimate is the gap between the last two levels; the error of the
  // last level is roughly its square
  check(e, std::sqrt(tol) * (1.0 + e.l1), "tanh-sinh");
  return e;
}

Estimate tanh_sinh(const Integrand& f, double a, double b, double tol) {
  return tanh_sinh([&](double x, double, double) { return f(x); }, a, b, tol);
}

Estimate gauss_kronrod(const Integrand& f, double a, double b, double tol, unsigned max_depth) {
  Estimate e;
  try {
    e.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, max_depth, tol, &e.error, &e.l1);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& ex) {
    throw Error(ErrorCode::QuadratureFailure, ex.what());
  }
  check(e, 100.0 * tol * (1.0 + e.l1), "Gauss-Kronrod");
  return e;
}

double gauss_legendre(const Integrand& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

Estimate periodic_trapezoid(const Integrand& f, double shift, std::size_t n, double tol, std::size_t max_nodes,
                            bool* converged) {
  // Offset nodes shift + (k + 1/2) h never hit `shift`, where callers put the singular angle.
  auto rule = [&](std::size_t m) {
    const double h = 2.0 * std::numbers::pi / static_cast<double>(m);
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) sum += f(shift + (static_cast<double>(k) + 0.5) * h);
    return sum / static_cast<double>(m);
  };
  Estimate e{rule(n), std::numeric_limits<double>::infinity(), 0.0};
  if (converged) *converged = false;
  while (2 * n <= max_nodes) {
    n *= 2;
    const double next = rule(n);
    e.error = std::abs(next - e.value);
    e.value = next;
    if (e.error <= tol * (1.0 + std::abs(next))) {
      if (converged) *converged = true;
      break;
    }
  }
  return e;
}

}  // namespace singlab::quad
