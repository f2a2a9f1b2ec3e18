#include "singlab/regularization.hpp"

#include <algorithm>
#include <cmath>

#include "singlab/error.hpp"

namespace singlab {

double eta(double s) {
  if (s < 0.0) throw Error(ErrorCode::NegativeArgument, "eta is defined for s >= 0");
  if (s <= 1.0) return s;
  if (s <= 3.0) return (-s * s + 6.0 * s - 1.0) / 4.0;
  return 2.0;
}

double eta_prime(double s) {
  if (s < 0.0) throw Error(ErrorCode::NegativeArgument, "eta is defined for s >= 0");
  if (s <= 1.0) return 1.0;
  if (s <= 3.0) return (3.0 - s) / 2.0;
  return 0.0;
}

double eta_eps(double eps, double s) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (eps == kNoCutoff) return s;
  return eta(eps * s) / eps;
}

double eta_eps_prime(double eps, double s) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (eps == kNoCutoff) return 1.0;
  return eta_prime(eps * s);
}

double u_eps(const PotentialSpec& spec, double eps, double t, const Vec& x) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (eps == kNoCutoff) return spec.evaluate(t, x);
  if (spec.is_singular(x)) return 2.0 / eps;
  return eta_eps(eps, spec.evaluate(t, x));
}

Vec u_eps_gradient(const PotentialSpec& spec, double eps, double t, const Vec& x) {
  if (eps == kNoCutoff) return spec.gradient(t, x);
  if (spec.is_singular(x)) return Vec::Zero(x.size());
  const double u = spec.evaluate(t, x);
  const double w = eta_eps_prime(eps, u);
  if (w == 0.0) return Vec::Zero(x.size());
  return w * spec.gradient(t, x);
}

Lagrangian PenalizedProblem::lagrangian() const {
  Lagrangian l;
  const PotentialSpec* s = spec;
  const double eps = epsilon;
  l.potential = [s, eps](double t, const Vec& x) { return u_eps(*s, eps, t, x); };
  l.gradient = [s, eps](double t, const Vec& x) { return u_eps_gradient(*s, eps, t, x); };
  const Path* a = &anchor;
  l.node_penalty = [a](std::size_t j, const Vec& x) { return 0.5 * a->metric().norm2(x - a->point(j)); };
  l.node_penalty_gradient = [a](std::size_t j, const Vec& x) { return a->metric().lower(x - a->point(j)); };
  return l;
}

namespace {

void check_candidate(const PenalizedProblem& p, const Path& c) {
  if (c.grid() != p.anchor.grid()) throw Error(ErrorCode::GridMismatch, "candidate grid differs from the anchor grid");
  const double tol = 1e-12 * (1.0 + p.anchor.metric().norm(p.anchor.points().front()) +
                              p.anchor.metric().norm(p.anchor.points().back()));
  if (p.anchor.metric().norm(c.points().front() - p.anchor.points().front()) > tol ||
      p.anchor.metric().norm(c.points().back() - p.anchor.points().back()) > tol) {
    throw Error(ErrorCode::BoundaryMismatch, "candidate ends differ from the anchor ends");
  }
}

}  // namespace

double penalized_action(const PenalizedProblem& p, const Path& c) {
  check_candidate(p, c);
  return discrete_action(c.metric(), c.grid(), c.points(), p.lagrangian());
}

double penalty(const PenalizedProblem& p, const Path& c) {
  check_candidate(p, c);
  const auto& g = c.grid();
  double total = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double w = 0.5 * ((j > 0 ? g[j] - g[j - 1] : 0.0) + (j + 1 < c.size() ? g[j + 1] - g[j] : 0.0));
    total += w * 0.5 * c.metric().norm2(c.point(j) - p.anchor.point(j));
  }
  return total;
}

std::vector<double> default_schedule(const PenalizedProblem& p, std::size_t count) {
  std::vector<double> u;
  for (std::size_t j = 0; j < p.anchor.size(); ++j) {
    if (!p.spec->is_singular(p.anchor.point(j))) u.push_back(p.spec->evaluate(p.anchor.time(j), p.anchor.point(j)));
  }
  if (u.empty()) throw Error(ErrorCode::InvalidArgument, "anchor lies entirely on the collision set");
  std::nth_element(u.begin(), u.begin() + static_cast<long>(u.size() / 2), u.end());
  const double median = std::max(u[u.size() / 2], 1e-300);
  std::vector<double> eps(count);
  for (std::size_t k = 0; k < count; ++k) eps[k] = std::ldexp(1.0 / (2.0 * median), -static_cast<int>(k));
  return eps;
}

std::vector<SweepRecord> epsilon_sweep(const PenalizedProblem& problem, const std::vector<double>& schedule,
                                       const MinimizerOptions& options, const std::optional<Path>& init) {
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    if (!(schedule[k] < schedule[k - 1])) throw Error(ErrorCode::InvalidArgument, "epsilon schedule must decrease");
  }
  const Path& anchor = problem.anchor;
  const MassMetric& m = anchor.metric();
  const auto& g = anchor.grid();
  std::vector<SweepRecord> out;
  for (double eps : schedule) {
    SweepRecord rec;
    rec.epsilon = eps;
    PenalizedProblem p{problem.spec, anchor, eps};
    try {
      const MinimizeResult r = local_minimize(p.lagrangian(), init ? *init : anchor, BoundaryCondition::fixed_ends(), options);
      rec.action = r.action;
      rec.converged = r.converged;
      rec.iterations = r.iterations;
      rec.penalty = penalty(p, r.path);
      for (std::size_t j = 0; j < anchor.size(); ++j) {
        rec.sup_dist = std::max(rec.sup_dist, m.norm(r.path.point(j) - anchor.point(j)));
        const double w = 0.5 * ((j > 0 ? g[j] - g[j - 1] : 0.0) + (j + 1 < anchor.size() ? g[j + 1] - g[j] : 0.0));
        if (!problem.spec->is_singular(anchor.point(j))) {
          rec.u_l1_dist += w * std::abs(u_eps(*problem.spec, eps, g[j], r.path.point(j)) -
                                        problem.spec->evaluate(g[j], anchor.point(j)));
        }
      }
      double v2 = 0.0;
      for (std::size_t j = 0; j + 1 < anchor.size(); ++j) {
        const double h = g[j + 1] - g[j];
        const Vec dv = (r.path.point(j + 1) - r.path.point(j) - anchor.point(j + 1) + anchor.point(j)) / h;
        v2 += h * m.norm2(dv);
      }
      rec.l2_vel_dist = std::sqrt(v2);
      rec.path = r.path;
    } catch (const Error& e) {
      rec.error = e.what();
    }
    out.push_back(std::move(rec));
  }
  return out;
}

nlohmann::json sweep_to_json(const std::vector<SweepRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j = {{"epsilon", r.epsilon},         {"action", r.action},     {"penalty", r.penalty},
                        {"sup_dist", r.sup_dist},       {"l2_vel_dist", r.l2_vel_dist},
                        {"u_l1_dist", r.u_l1_dist},     {"converged", r.converged}, {"iterations", r.iterations}};
    if (!r.error.empty()) j["error"] = r.error;
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace singlab
