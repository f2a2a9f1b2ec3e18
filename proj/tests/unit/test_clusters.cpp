#include <doctest.h>

#include <cmath>
#include <map>

#include "generators.hpp"
#include "singlab/asymptotics.hpp"
#include "singlab/clusters.hpp"
#include "singlab/error.hpp"

using namespace singlab;
using doctest::Approx;

TEST_CASE("n-body lattices are partition lattices") {
  // Bell numbers and the covering relations of the partition lattice
  const std::map<int, std::pair<std::size_t, std::size_t>> expected = {{2, {2, 1}}, {3, {5, 6}}, {4, {15, 31}}};
  for (const auto& [n, counts] : expected) {
    const PotentialSpec spec = PotentialSpec::homogeneous_n_body(MassMetric::unit(n, 2), 1.0);
    const CollisionLattice lat = CollisionLattice::build(spec);
    CHECK(lat.size() == counts.first);
    CHECK(lat.hasse_edges().size() == counts.second);
    CHECK(lat.element(lat.top()).dim() == 2 * n);
  }
}

TEST_CASE("cluster labels and the minimal element") {
  const MassMetric m({1.0, 2.0, 3.0}, 2);
  const CollisionLattice lat = CollisionLattice::build(PotentialSpec::homogeneous_n_body(m, 1.0));
  Vec xi(6);
  xi << 1.0, 1.0, 1.0, 1.0, -2.0, 0.5;
  const std::size_t k = lat.mu_of(xi);
  CHECK(lat.element(k).same_as(Subspace::coincidence(m, 0, 1)));
  CHECK(lat.partition(k) == std::vector<int>{0, 0, 2});
  CHECK(lat.margin(xi, k) > 0.1);
  Vec total(6);
  total << 0.5, 0.5, 0.5, 0.5, 0.5, 0.5;
  CHECK(lat.partition(lat.mu_of(total)) == std::vector<int>{0, 0, 0});
  Vec generic(6);
  generic << 0.0, 0.0, 1.0, 0.0, 0.0, 1.0;
  try {
    lat.mu_of(generic);
    FAIL("expected NotOnDelta");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotOnDelta);
  }
}

TEST_CASE("two lines in space meet at the origin") {
  const MassMetric m = MassMetric::unit(1, 3);
  Vec a(3), b(3);
  a << 1.0, 0.0, 0.0;
  b << 0.0, 1.0, 1.0;
  const CollisionLattice lat = CollisionLattice::from_subspaces(m, {Subspace::from_span(m, a), Subspace::from_span(m, b)});
  CHECK(lat.size() == 4);
  CHECK(lat.hasse_edges().size() == 4);
  CHECK(lat.partition(1).empty());
  CHECK(lat.to_json()["members"].size() == 4);
}

TEST_CASE("one-center lattice") {
  const CollisionLattice lat = CollisionLattice::build(PotentialSpec::one_center(2, 1.0));
  CHECK(lat.size() == 2);
  CHECK(lat.element(1).dim() == 0);
}

TEST_CASE("property: projections split x orthogonally in the metric") {
  const MassMetric m({1.0, 2.0, 3.0, 0.5}, 2);
  const CollisionLattice lat = CollisionLattice::build(PotentialSpec::homogeneous_n_body(m, 1.0));
  gen::for_all(81, 50, [&](gen::Gen& g) {
    const auto k = static_cast<std::size_t>(g.integer(0, static_cast<int>(lat.size()) - 1));
    const Vec x = g.normal_vec(8);
    const Vec p = lat.project(k, x), w = lat.complement(k, x);
    CHECK(m.norm(p + w - x) <= 1e-12 * m.norm(x));
    CHECK(std::abs(m.dot(p, w)) <= 1e-12 * m.norm2(x));
    CHECK(lat.element(k).distance(p) <= 1e-12 * m.norm(x));
  });
}

TEST_CASE("binary collision reduces to a Kepler-like total collision") {
  const PotentialSpec spec = PotentialSpec::homogeneous_n_body(MassMetric::unit(3, 2), 1.0);
  Vec x0(6);
  x0 << -0.05, 0.0, 0.05, 0.0, 0.0, 5.0;
  IntegratorOptions opt;
  opt.tol = 1e-13;
  const Path path = integrate(spec, x0, Vec::Zero(6), 0.0, 1.0, opt).path();
  const auto events = detect_collisions(path, spec);
  REQUIRE(events.size() == 1);
  CHECK(events[0].kind == CollisionKind::Partial);
  CHECK(events[0].clusters == std::vector<int>{0, 0, 2});
  const CollisionLattice lat = CollisionLattice::build(spec);
  const ReducedCollision red = reduce_partial_collision(path, events[0], lat, spec);
  CHECK(red.clusters == std::vector<int>{0, 0, 2});
  CHECK(red.window_end == events[0].sample);
  CHECK(red.p_accel_bound < 0.2);
  const auto reduced_events = detect_collisions(red.w, red.reduced);
  REQUIRE(reduced_events.size() == 1);
  CHECK(reduced_events[0].kind == CollisionKind::Total);
  const SundmanFit fit = fit_sundman(reduced_events[0], red.w, red.reduced);
  CHECK(fit.exponent == Approx(2.0 / 3.0).epsilon(1e-3));
}
