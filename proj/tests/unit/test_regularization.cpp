#include <doctest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "singlab/error.hpp"
#include "singlab/regularization.hpp"

using namespace singlab;
using doctest::Approx;

TEST_CASE("eta knots") {
  CHECK(eta(0.0) == 0.0);
  CHECK(eta(1.0) == 1.0);
  CHECK(eta(2.0) == 7.0 / 4.0);
  CHECK(eta(3.0) == 2.0);
  CHECK(eta(50.0) == 2.0);
  CHECK(eta_prime(1.0) == 1.0);
  CHECK(eta_prime(2.0) == 0.5);
  CHECK(eta_prime(3.0) == 0.0);
  CHECK_THROWS_AS(eta(-1e-300), Error);
}

TEST_CASE("eta is C1 across the knots") {
  for (double k : {1.0, 3.0}) {
    const double h = 1e-9;
    CHECK(eta(k + h) == Approx(eta(k - h)).epsilon(1e-8));
    CHECK(eta_prime(k + h) == Approx(eta_prime(k - h)).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("property: eta' s <= eta and eta' <= 1") {
  gen::for_all(31, 5000, [](gen::Gen& g) {
    const double eps = g.log_uniform(1e-6, 1e3), s = g.log_uniform(1e-8, 1e8);
    CHECK(eta_eps_prime(eps, s) * s <= eta_eps(eps, s) * (1.0 + 1e-15));
    CHECK(eta_eps_prime(eps, s) <= 1.0);
    CHECK(eta_eps(eps, s) <= 2.0 / eps);
  });
}

TEST_CASE("property: U_eps <= U, capped by 2/eps, equal to U where eps U <= 1") {
  const PotentialSpec spec = PotentialSpec::homogeneous_n_body(MassMetric({1.0, 2.0, 3.0}, 2), 1.0);
  gen::for_all(32, 2000, [&](gen::Gen& g) {
    const Vec x = g.configuration(spec, 1e-4, 10.0, 1e-3);
    const double eps = g.log_uniform(1e-4, 1e1);
    const double u = spec.evaluate(0.0, x), ue = u_eps(spec, eps, 0.0, x);
    CHECK(ue <= u * (1.0 + 4.0 * std::numeric_limits<double>::epsilon()));
    CHECK(ue <= 2.0 / eps);
    if (eps * u <= 1.0) CHECK(ue == Approx(u).epsilon(1e-15));
  });
  Vec on(6);
  on << 0.0, 0.0, 0.0, 0.0, 1.0, 1.0;
  CHECK(u_eps(spec, 0.5, 0.0, on) == 4.0);
  CHECK(u_eps(spec, kNoCutoff, 0.0, Vec::Ones(6) + Vec::LinSpaced(6, 0.0, 1.0)) ==
        spec.evaluate(0.0, Vec::Ones(6) + Vec::LinSpaced(6, 0.0, 1.0)));
}

TEST_CASE("property: U_eps gradient matches central differences") {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  gen::for_all(33, 200, [&](gen::Gen& g) {
    const Vec x = g.configuration(spec, 0.05, 5.0);
    const double eps = g.log_uniform(1e-2, 10.0);
    // stay off the knots where eta is only C1
    const double s = eps * spec.evaluate(0.0, x);
    if (std::abs(s - 1.0) < 1e-3 || std::abs(s - 3.0) < 1e-3) return;
    const double h = 1e-7 * spec.metric().norm(x);
    Vec fd(2);
    for (int i = 0; i < 2; ++i) {
      Vec p = x, m = x;
      p[i] += h;
      m[i] -= h;
      fd[i] = (u_eps(spec, eps, 0.0, p) - u_eps(spec, eps, 0.0, m)) / (2.0 * h);
    }
    const Vec exact = u_eps_gradient(spec, eps, 0.0, x);
    CHECK((exact - fd).norm() <= 1e-5 * (1.0 + exact.norm()));
  });
}

TEST_CASE("penalized action checks grids and ends") {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  const MassMetric& m = spec.metric();
  const Path anchor = Path::from_function(m, uniform_grid(0.0, 1.0, 10), [](double t) {
    Vec x(2);
    x << std::cos(t), std::sin(t);
    return x;
  });
  const PenalizedProblem problem{&spec, anchor, 0.1};
  CHECK(penalty(problem, anchor) == 0.0);
  CHECK(penalized_action(problem, anchor) > 0.0);
  std::vector<Vec> moved = anchor.points();
  moved.front()[0] += 0.1;
  try {
    penalized_action(problem, anchor.with_points(moved));
    FAIL("expected BoundaryMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BoundaryMismatch);
  }
  const Path other = Path::from_function(m, uniform_grid(0.0, 1.0, 11), [](double) { return Vec(Vec::Ones(2)); });
  try {
    penalty(problem, other);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
}

TEST_CASE("penalty is the trapezoid rule of |x - anchor|^2 / 2") {
  const PotentialSpec spec = PotentialSpec::one_center(1, 1.0);
  const MassMetric& m = spec.metric();
  const auto grid = uniform_grid(0.0, 1.0, 4);
  const Path anchor = Path::from_function(m, grid, [](double) { return Vec(Vec::Constant(1, 2.0)); });
  std::vector<Vec> pts(5, Vec::Constant(1, 2.0));
  pts[2][0] = 3.0;  // displaced by 1 at the middle node
  const PenalizedProblem problem{&spec, anchor, kNoCutoff};
  CHECK(penalty(problem, anchor.with_points(pts)) == Approx(0.5 * 0.25));
}

TEST_CASE("default schedule halves from 1 / (2 median U)") {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  const Path anchor = Path::from_function(spec.metric(), uniform_grid(0.0, 1.0, 8), [](double t) {
    Vec x(2);
    x << 2.0 * std::cos(t), 2.0 * std::sin(t);
    return x;
  });
  const auto eps = default_schedule(PenalizedProblem{&spec, anchor}, 4);
  REQUIRE(eps.size() == 4);
  CHECK(eps[0] == Approx(1.0));
  CHECK(eps[3] == Approx(0.125));
}
