#include "singlab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "singlab/error.hpp"

namespace singlab {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

struct Rhs {
  const PotentialSpec* spec;
  int n;
  mutable bool singular = false;

  void operator()(const State& y, State& dy, double t) const {
    Vec x = Eigen::Map<const Vec>(y.data(), n);
    for (int i = 0; i < n; ++i) dy[i] = y[n + i];
    Vec a;
    try {
      a = spec->gradient(t, x);
    } catch (const SingularConfiguration&) {
      singular = true;
      a = Vec::Constant(n, std::numeric_limits<double>::quiet_NaN());
    }
    for (int i = 0; i < n; ++i) dy[n + i] = a[i];
  }
};

bool finite(const State& y) {
  return std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
}

void record(OdeSolution& sol, double t, const State& y, int n) {
  sol.t.push_back(t);
  sol.x.push_back(Eigen::Map<const Vec>(y.data(), n));
  sol.v.push_back(Eigen::Map<const Vec>(y.data() + n, n));
}

}  // namespace

Path OdeSolution::path() const {
  if (t.size() >= 2 && t.back() < t.front()) {
    std::vector<double> g(t.rbegin(), t.rend());
    std::vector<Vec> xs(x.rbegin(), x.rend()), vs(v.rbegin(), v.rend());
    return Path(metric, std::move(g), std::move(xs), std::move(vs));
  }
  return Path(metric, t, x, v);
}

OdeSolution integrate(const PotentialSpec& spec, const Vec& x0, const Vec& v0, double t0, double t1,
                      const IntegratorOptions& opt) {
  const int n = spec.metric().size();
  if (x0.size() != n || v0.size() != n) throw Error(ErrorCode::InvalidArgument, "initial data has the wrong length");
  if (!(t1 != t0)) throw Error(ErrorCode::InvalidArgument, "empty time span");
  if (!(opt.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (!x0.allFinite() || !v0.allFinite()) throw Error(ErrorCode::NonFiniteState, "initial data is not finite");
  if (spec.is_singular(x0)) throw SingularConfiguration("initial configuration lies on the collision set", 0);

  const double dir = t1 > t0 ? 1.0 : -1.0;
  for (std::size_t k = 0; k < opt.output_times.size(); ++k) {
    const double s = opt.output_times[k];
    if (dir * (s - t0) < 0.0 || dir * (s - t1) > 0.0) {
      throw Error(ErrorCode::InvalidArgument, "output time outside the integration span");
    }
    if (k > 0 && !(dir * (s - opt.output_times[k - 1]) > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "output times must be strictly monotone");
    }
  }

  OdeSolution sol{spec.metric(), {}, {}, {}, {}, 0, 0, false};
  Rhs rhs{&spec, n};
  auto stepper = odeint::make_controlled(opt.tol, opt.tol, odeint::runge_kutta_fehlberg78<State>());

  State y(2 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    y[i] = x0[i];
    y[n + i] = v0[i];
  }
  double t = t0;
  double dt = dir * std::min(opt.initial_step, std::abs(t1 - t0));
  std::size_t next_out = 0;
  const bool dense = opt.output_times.empty();
  if (dense) {
    record(sol, t, y, n);
  } else {
    while (next_out < opt.output_times.size() && opt.output_times[next_out] == t0) {
      record(sol, t, y, n);
      ++next_out;
    }
  }
  const double u_start = spec.evaluate(t0, x0);

  auto halt = [&](const std::string& trigger, const Vec& x, double u) {
    sol.halted = true;
    sol.events.push_back({"CollisionApproach", t, u, spec.singular_distance(x), trigger});
    if (sol.t.empty() || sol.t.back() != t) record(sol, t, y, n);
  };

  std::size_t steps = 0;
  while (dir * (t1 - t) > 0.0) {
    if (++steps > opt.max_steps) throw Error(ErrorCode::MaxIterations, "integrator exceeded the step budget");
    double target = t1;
    if (!dense && next_out < opt.output_times.size()) target = opt.output_times[next_out];
    if (dir * (t + dt - target) > 0.0) dt = target - t;

    const double min_step = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (std::abs(dt) < min_step && dir * (target - t) > min_step) {
      Vec x = Eigen::Map<const Vec>(y.data(), n);
      const double u = spec.is_singular(x) ? std::numeric_limits<double>::infinity() : spec.evaluate(t, x);
      if (u > 1e6 * (1.0 + std::abs(u_start))) {
        halt("step-underflow", x, u);
        break;
      }
      throw Error(ErrorCode::StepUnderflow, "step size underflow at t = " + std::to_string(t));
    }

    const State saved = y;
    const double t_saved = t;
    rhs.singular = false;
    const double dt_try = dt;
    const auto res = stepper.try_step(std::cref(rhs), y, t, dt);
    if (res == odeint::fail || !finite(y) || rhs.singular) {
      y = saved;
      t = t_saved;
      if (res != odeint::fail) dt = 0.5 * dt_try;
      ++sol.rejected;
      continue;
    }
    ++sol.accepted;
    // Land exactly on the target when the step was clamped to it.
    if (std::abs(t - target) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(target))) t = target;

    Vec x = Eigen::Map<const Vec>(y.data(), n);
    const double dist = spec.singular_distance(x);
    const double u = spec.is_singular(x) ? std::numeric_limits<double>::infinity() : spec.evaluate(t, x);
    if (dense) {
      record(sol, t, y, n);
    } else if (next_out < opt.output_times.size() && t == opt.output_times[next_out]) {
      record(sol, t, y, n);
      ++next_out;
    }
    if (u > 1.0 / opt.collision_tol) {
      halt("potential", x, u);
      break;
    }
    if (dist < opt.r_floor) {
      halt("distance", x, u);
      break;
    }
  }
  return sol;
}

OdeSolution integrate_leapfrog(const PotentialSpec& spec, const Vec& x0, const Vec& v0, double t0, double t1,
                               std::size_t steps) {
  if (steps == 0) throw Error(ErrorCode::InvalidArgument, "leapfrog needs at least one step");
  if (spec.is_singular(x0)) throw SingularConfiguration("initial configuration lies on the collision set", 0);
  OdeSolution sol{spec.metric(), {t0}, {x0}, {v0}, {}, 0, 0, false};
  const double h = (t1 - t0) / static_cast<double>(steps);
  Vec x = x0, v = v0;
  Vec a = spec.gradient(t0, x);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = t0 + h * static_cast<double>(k);
    v += 0.5 * h * a;
    x += h * v;
    a = spec.gradient(t, x);
    v += 0.5 * h * a;
    if (!x.allFinite() || !v.allFinite()) throw Error(ErrorCode::NonFiniteState, "leapfrog state is not finite");
    sol.t.push_back(t);
    sol.x.push_back(x);
    sol.v.push_back(v);
    ++sol.accepted;
  }
  return sol;
}

std::vector<double> solution_energy(const OdeSolution& sol, const PotentialSpec& spec) {
  std::vector<double> h(sol.size());
  for (std::size_t j = 0; j < sol.size(); ++j) {
    h[j] = 0.5 * sol.metric.norm2(sol.v[j]) - spec.evaluate(sol.t[j], sol.x[j]);
  }
  return h;
}

Path homothetic_collision_orbit(const PotentialSpec& spec, const Vec& direction, double t_star,
                                const std::vector<double>& grid, double tol) {
  if (spec.is_logarithmic() || !(spec.alpha() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "homothetic orbits need a homogeneous potential");
  }
  const MassMetric& m = spec.metric();
  const double norm = m.norm(direction);
  if (!(norm > 0.0)) throw Error(ErrorCode::InvalidArgument, "direction must be nonzero");
  const Vec s = direction / norm;
  const double alpha = spec.alpha();
  const double b = spec.limit_potential(0.0, s);
  const double grad_t = spec.limit_tangential_gradient(0.0, s).lpNorm<Eigen::Infinity>();
  if (grad_t > tol * (1.0 + b)) {
    throw Error(ErrorCode::NotCentralConfiguration,
                "tangential gradient " + std::to_string(grad_t) + " at the given direction");
  }
  for (double r : {1.0, 0.5, 0.1}) {
    const double u = spec.evaluate(0.0, r * s);
    if (std::abs(u * std::pow(r, alpha) - b) > 1e-10 * b) {
      throw Error(ErrorCode::InvalidArgument, "potential is not homogeneous along the direction");
    }
  }
  for (double t : grid) {
    if (!(t < t_star)) throw Error(ErrorCode::InvalidArgument, "grid reaches the collision time");
  }
  const double p = 2.0 / (2.0 + alpha);
  const double k = (2.0 + alpha) / 2.0 * std::sqrt(2.0 * b);
  return Path::from_function(
      m, grid, [&](double t) -> Vec { return std::pow(k * (t_star - t), p) * s; },
      [&](double t) -> Vec { return -p * k * std::pow(k * (t_star - t), p - 1.0) * s; });
}

nlohmann::json events_to_json(const std::vector<OdeEvent>& events) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : events) {
    arr.push_back({{"kind", e.kind}, {"t", e.t}, {"potential", e.potential}, {"distance", e.distance},
                   {"trigger", e.trigger}});
  }
  return arr;
}

}  // namespace singlab
