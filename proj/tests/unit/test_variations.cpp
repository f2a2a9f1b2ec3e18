#include <doctest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "singlab/error.hpp"
#include "singlab/variations.hpp"

using namespace singlab;
using doctest::Approx;

namespace {

Vec v2(double a, double b) {
  Vec out(2);
  out << a, b;
  return out;
}

}  // namespace

TEST_CASE("Phi_1 at pi is -3 pi / 2") {
  CHECK(phi_alpha(1.0, std::numbers::pi) == Approx(-1.5 * std::numbers::pi).epsilon(1e-12));
  CHECK(phi_alpha(1.0, std::numbers::pi, QuadScheme::Swapped) == Approx(-1.5 * std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("Phi diverges at theta = 0 exactly when alpha >= 1") {
  CHECK(std::isinf(phi_alpha(1.0, 0.0)));
  CHECK(std::isinf(phi_alpha(1.5, 0.0)));
  CHECK(std::isfinite(phi_alpha(0.5, 0.0)));
}

TEST_CASE("property: both quadrature schemes agree on Phi") {
  gen::for_all(71, 20, [](gen::Gen& g) {
    const double alpha = g.uniform(0.2, 1.8), theta = g.uniform(0.05, std::numbers::pi);
    CHECK(phi_alpha(alpha, theta) == Approx(phi_alpha(alpha, theta, QuadScheme::Swapped)).epsilon(1e-9));
  });
}

TEST_CASE("average of Phi is negative") {
  for (double alpha : {0.5, 1.0, 1.5}) CHECK(average_phi(alpha) < 0.0);
  CHECK(average_phi(1.0) == Approx(-1.3708397431334).epsilon(1e-10));
}

TEST_CASE("S reduces to Phi for the one-center problem") {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  const Vec zeta = v2(1, 0), delta = v2(0.3, 0.4);
  // S(zeta, delta) = |delta|^{1 - alpha/2} |zeta|^{-1 - alpha/2} Phi(angle between zeta and -delta)
  const double theta = std::acos(-0.6);
  CHECK(displacement_potential(spec, zeta, delta) == Approx(std::sqrt(0.5) * phi_alpha(1.0, theta)).epsilon(1e-10));
  CHECK(displacement_potential(spec, zeta, v2(1, 0)) == Approx(-1.5 * std::numbers::pi).epsilon(1e-10));
}

TEST_CASE("property: S is homogeneous in zeta and delta") {
  gen::for_all(72, 25, [](gen::Gen& g) {
    const double alpha = g.uniform(0.3, 1.7);
    const PotentialSpec spec = PotentialSpec::one_center(2, alpha);
    // keep delta away from -zeta, where the displaced ray meets the origin
    const double az = g.uniform(0.0, 6.28), ad = az + std::numbers::pi + g.uniform(0.2, 6.08);
    const Vec zeta = v2(std::cos(az), std::sin(az)), delta = v2(std::cos(ad), std::sin(ad));
    const double lambda = g.log_uniform(0.1, 10.0), mu = g.log_uniform(0.1, 10.0);
    CHECK(displacement_potential(spec, mu * zeta, lambda * delta) ==
          Approx(std::pow(lambda, 1.0 - alpha / 2.0) * std::pow(mu, -1.0 - alpha / 2.0) *
                 displacement_potential(spec, zeta, delta))
              .epsilon(1e-9));
  });
}

TEST_CASE("parabolic blow-up normalization") {
  for (double alpha : {0.5, 1.0, 1.5}) {
    const PotentialSpec spec = PotentialSpec::one_center(2, alpha);
    const BlowUp q = BlowUp::parabolic(spec, v2(0.0, 2.0));
    const double r = q.zeta.norm();
    CHECK(std::pow(r, 2.0 + alpha) == Approx((2.0 + alpha) * (2.0 + alpha) / 2.0).epsilon(1e-10));
    CHECK(q.zeta[0] == 0.0);
    // zero energy along the ray
    const double t = 0.37;
    CHECK(0.5 * q.velocity(t).squaredNorm() == Approx(spec.evaluate(0.0, q.at(t))).epsilon(1e-10));
  }
}

TEST_CASE("standard variation shape") {
  const MassMetric m = MassMetric::unit(1, 2);
  const StandardVariation var(v2(0.3, 0.4), 1.0, m);
  CHECK(var.size() == Approx(0.5));
  CHECK((var.at(0.2) - v2(0.3, 0.4)).norm() == 0.0);
  CHECK(var.at(1.0).norm() == Approx(0.0).scale(1.0));
  CHECK(var.at(0.75).norm() == Approx(0.25));
  CHECK_THROWS_AS(StandardVariation(v2(1.0, 0.0), 0.5, m), Error);
}

TEST_CASE("action differential sign on a collision ray") {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  const BlowUp q = BlowUp::parabolic(spec, v2(1, 0));
  // pushing along the ray lowers the action to leading order: S = -3 pi / 2 there
  CHECK(action_differential(q, spec, StandardVariation(v2(1e-3, 0.0), 1.0, spec.metric())) < 0.0);
}

TEST_CASE("circle averages with and without singular angles") {
  const auto flat = circle_average([](double th) { return 2.0 + std::cos(th) + std::sin(3.0 * th); }, {});
  CHECK(flat.value == Approx(2.0).epsilon(1e-12));
  // log|1 - e^{i theta}| averages to zero with a log singularity at theta = 0
  const auto sing = circle_average([](double th) { return std::log(std::abs(2.0 * std::sin(th / 2.0))); }, {0.0});
  CHECK(sing.value == Approx(0.0).scale(1.0).epsilon(1e-7));
}

TEST_CASE("property: logarithmic mean values") {
  gen::for_all(73, 30, [](gen::Gen& g) {
    const double z = g.uniform(0.1, 2.0), y = 2.0 * z * g.uniform(1.0, 4.0);
    CHECK(log_mean_value(y, z) == Approx(std::log((y + std::sqrt(y * y - 4.0 * z * z)) / 2.0)).epsilon(1e-13));
    CHECK(log_mean_value_quadrature(y, z) == Approx(log_mean_value(y, z)).scale(1.0).epsilon(1e-10));
    const Eigen::Vector2d x(g.uniform(-2.0, 2.0), g.uniform(-2.0, 2.0));
    const double rad = g.uniform(0.05, 3.0);
    CHECK(circle_average_log_quadrature(x, rad) ==
          Approx(std::max(std::log(x.squaredNorm()), std::log(rad * rad))).scale(1.0).epsilon(1e-10));
  });
}

TEST_CASE("logarithmic ejection") {
  const LogEjection ej{2.0, 3.0};
  CHECK(ej.radius(0.0) == 0.0);
  CHECK(ej.radius(ej.time_to_rest()) == Approx(3.0).epsilon(1e-13));
  // energy: rdot^2 = 2 M log(R / r)
  for (double t : {0.1, 0.5, 1.0}) {
    const double r = ej.radius(t);
    CHECK(ej.speed(t) * ej.speed(t) == Approx(2.0 * 2.0 * std::log(3.0 / r)).epsilon(1e-9));
  }
}

TEST_CASE("a path through the collision set is rejected") {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  // the plateau of the variation carries the constant path onto the centre
  const Path base = Path::from_function(spec.metric(), uniform_grid(0.0, 1.0, 20), [](double) { return Vec(v2(0.1, 0.0)); });
  try {
    action_differential(base, spec, StandardVariation(v2(-0.1, 0.0), 0.5, spec.metric()));
    FAIL("expected PathThroughSingularity");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PathThroughSingularity);
  }
}
