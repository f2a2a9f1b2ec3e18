#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "singlab/integrator.hpp"
#include "singlab/minimizer.hpp"
#include "singlab/path.hpp"
#include "singlab/variations.hpp"

using namespace singlab;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// Radial Kepler ejection run forward into the collision.
void BM_KeplerToCollision(benchmark::State& state) {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  IntegratorOptions opt;
  opt.tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state) {
    const OdeSolution sol = integrate(spec, vec2(1.0, 0.0), vec2(-std::sqrt(2.0), 0.0), 0.0, 1.0, opt);
    benchmark::DoNotOptimize(sol.t.back());
  }
}
BENCHMARK(BM_KeplerToCollision)->Arg(9)->Arg(11)->Arg(13)->Unit(benchmark::kMillisecond);

void BM_CircularOrbit(benchmark::State& state) {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  for (auto _ : state) {
    const OdeSolution sol = integrate(spec, vec2(1.0, 0.0), vec2(0.0, 1.0), 0.0, 2.0 * std::numbers::pi);
    benchmark::DoNotOptimize(sol.t.back());
  }
}
BENCHMARK(BM_CircularOrbit)->Unit(benchmark::kMillisecond);

void BM_PhiAlpha(benchmark::State& state) {
  const auto scheme = state.range(0) == 0 ? QuadScheme::Nested : QuadScheme::Swapped;
  for (auto _ : state) benchmark::DoNotOptimize(phi_alpha(1.0, 2.0, scheme));
}
BENCHMARK(BM_PhiAlpha)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_AveragePhi(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(average_phi(1.0));
}
BENCHMARK(BM_AveragePhi)->Unit(benchmark::kMillisecond);

// Quarter-period Kepler arc between fixed ends, from a perturbed straight line.
void BM_BolzaMinimize(benchmark::State& state) {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  const auto cells = static_cast<std::size_t>(state.range(0));
  const std::vector<double> grid = uniform_grid(0.0, std::numbers::pi / 2.0, cells);
  std::vector<Vec> pts;
  for (double t : grid) {
    const double u = t / grid.back();
    pts.push_back((1.0 - u) * vec2(1.0, 0.0) + u * vec2(0.0, 1.0) + 0.05 * std::sin(std::numbers::pi * u) * vec2(1.0, -0.5));
  }
  const Path init(spec.metric(), grid, pts);
  const Lagrangian lag = Lagrangian::from_spec(spec);
  for (auto _ : state) {
    const MinimizeResult res = local_minimize(lag, init, BoundaryCondition::fixed_ends());
    benchmark::DoNotOptimize(res.action);
  }
}
BENCHMARK(BM_BolzaMinimize)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_DiscreteActionGradient(benchmark::State& state) {
  const PotentialSpec spec = PotentialSpec::one_center(2, 1.0);
  const std::vector<double> grid = uniform_grid(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  std::vector<Vec> pts;
  for (double t : grid) pts.push_back(vec2(std::cos(t), std::sin(t)));
  const Lagrangian lag = Lagrangian::from_spec(spec);
  std::vector<Vec> partials;
  for (auto _ : state) benchmark::DoNotOptimize(discrete_action(spec.metric(), grid, pts, lag, &partials));
}
BENCHMARK(BM_DiscreteActionGradient)->Arg(200)->Arg(2000);

}  // namespace

BENCHMARK_MAIN();
