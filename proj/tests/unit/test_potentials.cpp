#include <doctest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "singlab/assumptions.hpp"
#include "singlab/error.hpp"
#include "singlab/potential.hpp"
#include "singlab/potential_io.hpp"

using namespace singlab;
using doctest::Approx;

namespace {

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<int>(xs.size()));
  int i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

// Central differences of U, raised by the metric.
Vec fd_gradient(const PotentialSpec& spec, double t, const Vec& x, double h) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec p = x, m = x;
    p[i] += h;
    m[i] -= h;
    g[i] = (spec.evaluate(t, p) - spec.evaluate(t, m)) / (2.0 * h);
  }
  return spec.metric().raise(g);
}

}  // namespace

TEST_CASE("one-center values") {
  CHECK(PotentialSpec::one_center(2, 1.0).evaluate(0.0, v({3.0, 4.0})) == Approx(0.2).epsilon(1e-15));
  CHECK(PotentialSpec::one_center(2, 0.5, 3.0).evaluate(0.0, v({3.0, 4.0})) == Approx(3.0 / std::sqrt(5.0)).epsilon(1e-15));
  CHECK(PotentialSpec::logarithmic_one_center(2).evaluate(0.0, v({0.0, std::exp(-2.0)})) == Approx(2.0).epsilon(1e-14));
}

TEST_CASE("n-body values use the mass products") {
  const PotentialSpec spec = PotentialSpec::homogeneous_n_body(MassMetric({1.0, 2.0}, 2), 1.0);
  CHECK(spec.evaluate(0.0, v({0.0, 0.0, 2.0, 0.0})) == Approx(1.0).epsilon(1e-15));
  const PotentialSpec lg = PotentialSpec::logarithmic_n_body(MassMetric({1.0, 3.0}, 1));
  CHECK(lg.evaluate(0.0, v({0.0, std::exp(1.0)})) == Approx(-3.0).epsilon(1e-14));
}

TEST_CASE("hip-hop constant") {
  CHECK(PotentialSpec::hip_hop_constant(2, 1.0) == Approx(1.0).epsilon(1e-15));
  CHECK(PotentialSpec::hip_hop_constant(3, 1.0) == Approx(4.0 / std::sqrt(3.0)).epsilon(1e-14));
}

TEST_CASE("property: metric gradient matches central differences") {
  const PotentialSpec specs[] = {
      PotentialSpec::one_center(3, 0.7),
      PotentialSpec::homogeneous_n_body(MassMetric({1.0, 2.0, 0.5}, 2), 1.0),
      PotentialSpec::quasi_homogeneous(MassMetric({1.0, 1.5, 2.0}, 2), 1.5, 0.5, 0.3),
      PotentialSpec::logarithmic_n_body(MassMetric({1.0, 2.0, 3.0}, 2)),
  };
  for (const auto& spec : specs) {
    gen::for_all(11, 50, [&](gen::Gen& g) {
      const Vec x = g.configuration(spec, 0.3, 3.0, 0.1);
      const Vec exact = spec.gradient(0.0, x);
      const Vec fd = fd_gradient(spec, 0.0, x, 1e-6);
      CHECK(spec.metric().norm(exact - fd) <= 1e-6 * (1.0 + spec.metric().norm(exact)));
    });
  }
}

TEST_CASE("property: homogeneity of degree -alpha") {
  gen::for_all(12, 100, [](gen::Gen& g) {
    const double alpha = g.uniform(0.1, 1.9);
    const PotentialSpec spec = PotentialSpec::homogeneous_n_body(MassMetric({1.0, 2.0, 3.0}, 2), alpha);
    const Vec x = g.configuration(spec, 0.1, 10.0);
    const double lambda = g.log_uniform(1e-3, 1e3);
    CHECK(spec.evaluate(0.0, lambda * x) == Approx(std::pow(lambda, -alpha) * spec.evaluate(0.0, x)).epsilon(1e-12));
  });
}

TEST_CASE("property: logarithmic scaling adds -log(lambda) sum m_i m_j") {
  const PotentialSpec spec = PotentialSpec::logarithmic_n_body(MassMetric({1.0, 2.0, 3.0}, 2));
  gen::for_all(13, 100, [&](gen::Gen& g) {
    const Vec x = g.configuration(spec, 0.1, 10.0);
    const double lambda = g.log_uniform(1e-3, 1e3);
    CHECK(spec.evaluate(0.0, lambda * x) ==
          Approx(spec.evaluate(0.0, x) - 11.0 * std::log(lambda)).epsilon(1e-12).scale(1.0));
  });
}

TEST_CASE("time-varying masses: partial_t matches a time difference") {
  const PotentialSpec spec = potential_from_json(
      {{"kind", "homogeneous_n_body"}, {"dim", 2}, {"alpha", 1.0}, {"mass_poly", {{1.0, 0.5}, {2.0, -0.25}}}});
  CHECK(spec.is_time_dependent());
  gen::for_all(14, 30, [&](gen::Gen& g) {
    const Vec x = g.configuration(spec, 0.5, 2.0);
    const double t = g.uniform(0.0, 1.0), h = 1e-6;
    const double fd = (spec.evaluate(t + h, x) - spec.evaluate(t - h, x)) / (2.0 * h);
    CHECK(spec.partial_t(t, x) == Approx(fd).epsilon(1e-7));
  });
}

TEST_CASE("configurations on the collision set are refused") {
  const PotentialSpec spec = PotentialSpec::homogeneous_n_body(MassMetric::unit(3, 2), 1.0);
  const Vec x = v({1.0, 1.0, 1.0, 1.0, 0.0, 0.0});
  CHECK(spec.is_singular(x));
  CHECK(spec.singular_distance(x) == 0.0);
  CHECK_THROWS_AS(spec.evaluate(0.0, x), SingularConfiguration);
  CHECK_THROWS_AS(spec.gradient(0.0, x), SingularConfiguration);
}

TEST_CASE("singular distance of a pair is |x_i - x_j| sqrt(m_i m_j / (m_i + m_j))") {
  const PotentialSpec spec = PotentialSpec::homogeneous_n_body(MassMetric({1.0, 3.0}, 1), 1.0);
  CHECK(spec.singular_distance(v({0.0, 2.0})) == Approx(2.0 * std::sqrt(3.0 / 4.0)).epsilon(1e-14));
}

TEST_CASE("limit potential keeps the leading term only") {
  const PotentialSpec q = PotentialSpec::quasi_homogeneous(MassMetric({1.0}, 2), 1.5, 0.5, 4.0);
  const Vec s = v({0.6, 0.8});
  CHECK(q.alpha() == 1.5);
  CHECK(q.limit_potential(0.0, s) == Approx(1.0).epsilon(1e-14));
}

TEST_CASE("JSON loader rejects unknown keys and bad kinds") {
  using nlohmann::json;
  auto code = [](const json& doc) {
    try {
      potential_from_json(doc);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code({{"kind", "one_center"}, {"dim", 2}, {"alpha", 1.0}, {"colour", 1}}) == ErrorCode::ConfigError);
  CHECK(code({{"kind", "nope"}}) == ErrorCode::ConfigError);
  CHECK(code({{"kind", "one_center"}, {"alpha", 1.0}}) == ErrorCode::ConfigError);
  const PotentialSpec ok = potential_from_json({{"kind", "one_center"}, {"dim", 3}, {"alpha", 0.5}});
  CHECK(ok.metric().size() == 3);
  CHECK(potential_summary(ok)["alpha"] == 0.5);
}

TEST_CASE("assumption checks pass on the Newtonian three-body problem") {
  const PotentialSpec spec = PotentialSpec::homogeneous_n_body(MassMetric({1.0, 2.0, 3.0}, 2), 1.0);
  SamplerOptions so;
  so.count = 120;
  so.seed = 5;
  const AssumptionReport rep = check_assumptions(spec, so);
  for (const auto& c : rep.checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
  }
  CHECK(rep.all_passed());
}

TEST_CASE("time-dependent masses with C1 = 0 break U1") {
  // C1 = 0 declared, but the masses change in time
  const PotentialSpec spec = potential_from_json(
      {{"kind", "homogeneous_n_body"}, {"dim", 2}, {"alpha", 1.0}, {"mass_poly", {{1.0, 0.2}, {1.0}}}});
  SamplerOptions so;
  so.count = 60;
  const AssumptionReport rep = check_assumptions(spec, so);
  const AssumptionCheck* u1 = rep.find("U1");
  REQUIRE(u1 != nullptr);
  CHECK_FALSE(u1->passed);
  CHECK_FALSE(rep.all_passed());
}
