#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "singlab/asymptotics.hpp"
#include "singlab/central_configurations.hpp"
#include "singlab/error.hpp"

using namespace singlab;
using doctest::Approx;

namespace {

Vec v2(double a, double b) {
  Vec out(2);
  out << a, b;
  return out;
}

struct Infall {
  Path path;
  std::vector<CollisionEvent> events;
};

Infall infall(const PotentialSpec& spec, const Vec& x0, const Vec& v0) {
  const OdeSolution sol = integrate(spec, x0, v0, 0.0, 3.0);
  Path p = sol.path();
  auto ev = detect_collisions(p, spec);
  return {std::move(p), std::move(ev)};
}

}  // namespace

TEST_CASE("Sundman fits of radial one-center infall") {
  for (double alpha : {0.5, 1.0, 1.5}) {
    const PotentialSpec spec = PotentialSpec::one_center(2, alpha);
    const Infall run = infall(spec, v2(1, 0), v2(-std::sqrt(2.0), 0));
    REQUIRE(run.events.size() == 1);
    const CollisionEvent& e = run.events[0];
    CHECK(e.kind == CollisionKind::Total);
    CHECK(e.side == CollisionSide::Left);
    // zero energy: t* = 1 / (sqrt 2 (1 + alpha/2))
    CHECK(e.t_star == Approx(1.0 / (std::sqrt(2.0) * (1.0 + alpha / 2.0))).epsilon(1e-6));
    const SundmanFit f = fit_sundman(e, run.path, spec);
    CHECK(f.expected_exponent == 2.0 / (2.0 + alpha));
    CHECK(f.exponent == Approx(f.expected_exponent).epsilon(1e-4));
    CHECK(f.K == Approx((2.0 + alpha) / std::sqrt(2.0)).epsilon(1e-4));
    CHECK(f.b == Approx(1.0).epsilon(1e-6));
    CHECK(f.b_kinetic == Approx(1.0).epsilon(1e-6));
    // phi = -rdot r^{alpha/2} -> sqrt(2b)
    CHECK(f.phi_min == Approx(std::sqrt(2.0)).epsilon(1e-6));
    CHECK(to_json(f)["exponent"] == f.exponent);
  }
}

TEST_CASE("Kepler infall with angular momentum is not a collision") {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  const Infall run = infall(spec, v2(1, 0), v2(-1.0, 0.3));
  CHECK(run.events.empty());
}

TEST_CASE("logarithmic law") {
  const PotentialSpec spec = PotentialSpec::logarithmic_one_center(2);
  const Infall run = infall(spec, v2(1, 0), v2(0, 0));
  REQUIRE(run.events.size() == 1);
  const SundmanFit f = fit_sundman_log(run.events[0], run.path, spec);
  CHECK(f.log_law);
  CHECK(f.M0 == 1.0);
  CHECK(f.t_star == Approx(std::sqrt(std::numbers::pi / 2.0)).epsilon(1e-8));
  for (double e : f.energy_ratio) CHECK(e == Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(f.law_ratio.back() - 1.0) < std::abs(f.law_ratio.front() - 1.0));
}

TEST_CASE("value at radius interpolates in log r") {
  const std::vector<double> r = {1e-4, 1e-3, 1e-2}, q = {4.0, 3.0, 2.0};
  CHECK(value_at_radius(r, q, std::sqrt(1e-7)) == Approx(3.5));
  CHECK(value_at_radius(r, q, 1e-3) == Approx(3.0));
}

TEST_CASE("event windows and isolation") {
  CollisionEvent a, b;
  a.sample = 10;
  a.window_begin = 0;
  a.window_end = 10;
  b.sample = 30;
  b.window_begin = 20;
  b.window_end = 30;
  CHECK(collisions_isolated({a, b}));
  b.window_begin = 5;
  CHECK_FALSE(collisions_isolated({a, b}));
}

TEST_CASE("Gamma stays bounded and tends to -b") {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  const Infall run = infall(spec, v2(1, 0), v2(-std::sqrt(2.0), 0));
  const GammaSeries g = gamma_series(run.events[0], run.path, spec, GammaVariant::Homogeneous);
  CHECK(g.bounded);
  CHECK(g.limit == Approx(-1.0).epsilon(1e-4));
}

TEST_CASE("McGehee variables rebuild the state") {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  const Infall run = infall(spec, v2(1, 0), v2(-std::sqrt(2.0), 0));
  const CollisionEvent& e = run.events[0];
  const McGeheeSeries mc =
      mcgehee_transform(run.path, spec, e.window_begin, e.window_end, collision_subspace(spec, e));
  CHECK(mc.max_reconstruction <= 1e-12);
  CHECK(mc.max_us <= 1e-12);
  // v = rdot r^{alpha/2} = -sqrt(2) on the parabolic radial orbit
  for (double v : mc.v) CHECK(v == Approx(-std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("central configurations of three equal masses") {
  const PotentialSpec spec = PotentialSpec::homogeneous_n_body(MassMetric::unit(3, 2), 1.0);
  CentralSearchOptions opt;
  opt.starts = 24;
  const CentralConfigurationSet set = find_central_configurations(spec, opt);
  REQUIRE_FALSE(set.members.empty());
  std::vector<double> levels;
  for (const auto& c : set.members) {
    CHECK(c.gradient <= 1e-8);
    CHECK(spec.metric().norm(c.s) == Approx(1.0).epsilon(1e-12));
    levels.push_back(c.level);
  }
  std::sort(levels.begin(), levels.end());
  // descent only reaches the minima: the equilateral triangle (unit sides at
  // I = 1) and its mirror image. The collinear saddles are not expected.
  CHECK(levels.front() == Approx(3.0).epsilon(1e-8));
  CHECK(levels.back() == Approx(3.0).epsilon(1e-8));
  CHECK(rotation_invariant(spec));
}

TEST_CASE("property: alignment removes a rotation") {
  const MassMetric m({1.0, 2.0, 3.0}, 2);
  gen::for_all(61, 20, [&](gen::Gen& g) {
    const Vec a = g.normal_vec(6);
    const double th = g.uniform(0.0, 2.0 * std::numbers::pi);
    Vec b(6);
    for (int i = 0; i < 3; ++i) {
      b[2 * i] = std::cos(th) * a[2 * i] - std::sin(th) * a[2 * i + 1];
      b[2 * i + 1] = std::sin(th) * a[2 * i] + std::cos(th) * a[2 * i + 1];
    }
    CHECK(m.norm(align_rotation(m, a, b) - a) <= 1e-12 * m.norm(a));
  });
}
