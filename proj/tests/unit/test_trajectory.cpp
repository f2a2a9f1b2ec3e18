#include <doctest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "singlab/error.hpp"
#include "singlab/integrator.hpp"
#include "singlab/path.hpp"
#include "singlab/path_io.hpp"

using namespace singlab;
using doctest::Approx;

namespace {

Vec v2(double a, double b) {
  Vec out(2);
  out << a, b;
  return out;
}

Path line(const MassMetric& m, const Vec& a, const Vec& b, double T, std::size_t cells) {
  return Path::from_function(m, uniform_grid(0.0, T, cells), [&](double t) { return Vec(a + (t / T) * (b - a)); });
}

}  // namespace

TEST_CASE("grids and paths reject degenerate input") {
  CHECK_THROWS_AS(uniform_grid(1.0, 1.0, 4), Error);
  const MassMetric m = MassMetric::unit(1, 2);
  CHECK_THROWS_AS(Path(m, {0.0, 0.0}, {v2(0, 0), v2(1, 1)}), Error);
  CHECK_THROWS_AS(Path(m, {0.0, 1.0}, {v2(0, 0)}), Error);
  try {
    Path(m, {0.0, 1.0, 0.5}, {v2(0, 0), v2(1, 1), v2(2, 2)});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateGrid);
  }
}

TEST_CASE("kinetic action of a straight segment is m |b - a|^2 / (2T)") {
  const MassMetric m({2.0}, 2);
  const Path p = line(m, v2(0, 0), v2(3, 4), 2.0, 7);
  CHECK(kinetic_action(p) == Approx(2.0 * 25.0 / 4.0).epsilon(1e-14));
}

TEST_CASE("action adds midpoint potential values") {
  // circle of radius 2 at unit angular speed: U = 1/2 at every midpoint chord
  const MassMetric m = MassMetric::unit(1, 2);
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  const std::size_t n = 64;
  const Path p = Path::from_function(m, uniform_grid(0.0, 1.0, n), [](double t) { return Vec(2.0 * v2(std::cos(t), std::sin(t))); });
  const double h = 1.0 / n, chord = 4.0 * std::sin(h / 2.0), mid = 2.0 * std::cos(h / 2.0);
  CHECK(action(p, spec) == Approx(n * (0.5 * chord * chord / h + h / mid)).epsilon(1e-13));
}

TEST_CASE("three-point differences are exact on quadratics") {
  gen::Gen g(21);
  std::vector<double> grid{0.0};
  for (int k = 0; k < 20; ++k) grid.push_back(grid.back() + g.uniform(0.05, 0.3));
  std::vector<double> f, df;
  for (double t : grid) {
    f.push_back(1.0 - 2.0 * t + 3.0 * t * t);
    df.push_back(-2.0 + 6.0 * t);
  }
  const auto d = differentiate(grid, f);
  const auto dd = second_difference(grid, f);
  for (std::size_t j = 0; j < grid.size(); ++j) CHECK(d[j] == Approx(df[j]).epsilon(1e-11));
  for (std::size_t j = 1; j + 1 < grid.size(); ++j) CHECK(dd[j] == Approx(6.0).epsilon(1e-9));
  CHECK(std::isnan(dd.front()));
}

TEST_CASE("moment of inertia uses the mass metric") {
  const MassMetric m({1.0, 3.0}, 2);
  Vec x(4);
  x << 1.0, 0.0, 0.0, 2.0;
  const Path p(m, {0.0, 1.0}, {x, x});
  CHECK(moment_of_inertia(p, 0) == Approx(13.0));
}

TEST_CASE("radial split flags the origin") {
  const MassMetric m = MassMetric::unit(1, 2);
  const Path p(m, {0.0, 1.0, 2.0}, {v2(3, 4), v2(0, 0), v2(0, 1)});
  const RadialAngular ra = radial_split(p);
  CHECK(ra.r[0] == Approx(5.0));
  CHECK(ra.collision[1]);
  CHECK_FALSE(ra.collision[0]);
  CHECK(ra.s[0][0] == Approx(0.6));
}

TEST_CASE("energy of the circular Kepler orbit is constant at -1/2") {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  const OdeSolution sol = integrate(spec, v2(1, 0), v2(0, 1), 0.0, 3.0);
  const EnergySeries e = energy_series(sol.path(), spec);
  CHECK(e.velocity_scheme == "stored");
  for (double h : e.h) CHECK(h == Approx(-0.5).epsilon(1e-10));
}

TEST_CASE("Lagrange-Jacobi margin equals (alpha_tilde - alpha) U on a Kepler orbit") {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  IntegratorOptions opt;
  for (int k = 0; k <= 400; ++k) opt.output_times.push_back(k * 0.01);
  const Path p = integrate(spec, v2(1, 0), v2(0, 1.2), 0.0, 4.0, opt).path();
  const MarginSeries ms = lagrange_jacobi_margin(p, spec);
  for (std::size_t j = 1; j + 1 < p.size(); ++j) {
    CHECK(ms.margin[j] == Approx(0.5 * spec.evaluate(0.0, p.point(j))).epsilon(1e-4));
  }
}

TEST_CASE("path CSV round trip") {
  const MassMetric m = MassMetric::unit(2, 2);
  gen::Gen g(22);
  std::vector<Vec> pts;
  for (int k = 0; k < 5; ++k) pts.push_back(g.normal_vec(4));
  const Path p(m, {0.0, 0.1, 0.25, 0.7, 1.0}, pts);
  const std::string csv = path_csv(p);
  CHECK(csv.rfind("t,x_1_1,x_1_2,x_2_1,x_2_2\n", 0) == 0);
  const Path q = parse_path_csv(csv, m);
  REQUIRE(q.size() == p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    CHECK(q.time(j) == p.time(j));
    CHECK((q.point(j) - p.point(j)).norm() == 0.0);
  }
  CHECK_THROWS_AS(parse_path_csv("t,x_1_1\n0,1\n", m), Error);
}

TEST_CASE("CSV fields are quoted when needed") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  Series s;
  s.add("t", {0.0, 1.0});
  s.add("x,y", {2.0, 3.0});
  CHECK(series_csv(s).rfind("t,\"x,y\"\n", 0) == 0);
  CHECK_THROWS_AS(s.add("short", {1.0}), Error);
}

TEST_CASE("property: piecewise-linear interpolation hits the nodes") {
  gen::for_all(23, 20, [](gen::Gen& g) {
    const MassMetric m = MassMetric::unit(1, 2);
    std::vector<Vec> pts;
    for (int k = 0; k < 6; ++k) pts.push_back(g.normal_vec(2));
    const Path p(m, uniform_grid(0.0, 1.0, 5), pts);
    const int j = g.integer(0, 5);
    CHECK((p.at(p.time(static_cast<std::size_t>(j))) - pts[static_cast<std::size_t>(j)]).norm() <= 1e-15);
    const double t = g.uniform(0.0, 1.0);
    const auto k = static_cast<std::size_t>(std::min(4.0, std::floor(t * 5.0)));
    const double u = (t - p.time(k)) / (p.time(k + 1) - p.time(k));
    CHECK((p.at(t) - ((1.0 - u) * pts[k] + u * pts[k + 1])).norm() <= 1e-14);
  });
}
