#include "singlab/minimizer.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>

#include "singlab/error.hpp"

namespace singlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

PathVariables::PathVariables(const Path& ref, const BoundaryCondition& bc)
    : bc_(bc), first_(ref.points().front()), last_(ref.points().back()), n_(ref.size()), dim_(ref.metric().size()) {
  const double scale = 1e-9 * (1.0 + ref.metric().norm(first_) + ref.metric().norm(last_));
  switch (bc_.kind) {
    case BoundaryKind::FixedEnds:
      if (n_ < 3) throw Error(ErrorCode::DegenerateGrid, "fixed-ends minimization needs an interior node");
      size_ = (n_ - 2) * static_cast<std::size_t>(dim_);
      break;
    case BoundaryKind::SubspaceEnds:
      if (!bc_.start || !bc_.end) throw Error(ErrorCode::InvalidArgument, "subspace ends need X0 and X1");
      if (bc_.start->ambient() != dim_ || bc_.end->ambient() != dim_) {
        throw Error(ErrorCode::InvalidArgument, "boundary subspaces live in the wrong space");
      }
      if (bc_.start->distance(first_) > scale || bc_.end->distance(last_) > scale) {
        throw Error(ErrorCode::BoundaryMismatch, "initial path ends are not on X0 / X1");
      }
      b0_ = bc_.start->basis();
      b1_ = bc_.end->basis();
      size_ = static_cast<std::size_t>(b0_.cols() + b1_.cols()) + (n_ - 2) * static_cast<std::size_t>(dim_);
      break;
    case BoundaryKind::Periodic:
      if (ref.metric().norm(first_ - last_) > scale) {
        throw Error(ErrorCode::BoundaryMismatch, "periodic initial path must close up");
      }
      size_ = (n_ - 1) * static_cast<std::size_t>(dim_);
      break;
  }
}

PathVariables::Combination PathVariables::combination(std::size_t j, int c) const {
  const std::size_t d = static_cast<std::size_t>(dim_);
  const auto cu = static_cast<std::size_t>(c);
  switch (bc_.kind) {
    case BoundaryKind::FixedEnds:
      if (j == 0 || j == n_ - 1) return {};
      return {{(j - 1) * d + cu, 1.0}};
    case BoundaryKind::SubspaceEnds: {
      const auto k0 = static_cast<std::size_t>(b0_.cols());
      if (j == 0) {
        Combination out;
        for (std::size_t k = 0; k < k0; ++k) out.emplace_back(k, b0_(c, static_cast<Eigen::Index>(k)));
        return out;
      }
      if (j == n_ - 1) {
        Combination out;
        const std::size_t off = k0 + (n_ - 2) * d;
        for (Eigen::Index k = 0; k < b1_.cols(); ++k) out.emplace_back(off + static_cast<std::size_t>(k), b1_(c, k));
        return out;
      }
      return {{k0 + (j - 1) * d + cu, 1.0}};
    }
    case BoundaryKind::Periodic:
      if (j == n_ - 1) j = 0;
      return {{j * d + cu, 1.0}};
  }
  return {};
}

Vec PathVariables::pack(const std::vector<Vec>& points) const {
  Vec z(static_cast<Eigen::Index>(size_));
  const auto d = static_cast<Eigen::Index>(dim_);
  switch (bc_.kind) {
    case BoundaryKind::FixedEnds:
      for (std::size_t j = 1; j + 1 < n_; ++j) z.segment(static_cast<Eigen::Index>(j - 1) * d, d) = points[j];
      break;
    case BoundaryKind::SubspaceEnds: {
      const auto k0 = b0_.cols(), k1 = b1_.cols();
      z.head(k0) = bc_.start->coordinates(points.front());
      for (std::size_t j = 1; j + 1 < n_; ++j) z.segment(k0 + static_cast<Eigen::Index>(j - 1) * d, d) = points[j];
      z.tail(k1) = bc_.end->coordinates(points.back());
      break;
    }
    case BoundaryKind::Periodic:
      for (std::size_t j = 0; j + 1 < n_; ++j) z.segment(static_cast<Eigen::Index>(j) * d, d) = points[j];
      break;
  }
  return z;
}

std::vector<Vec> PathVariables::unpack(const Vec& z) const {
  std::vector<Vec> pts(n_);
  const auto d = static_cast<Eigen::Index>(dim_);
  switch (bc_.kind) {
    case BoundaryKind::FixedEnds:
      pts.front() = first_;
      pts.back() = last_;
      for (std::size_t j = 1; j + 1 < n_; ++j) pts[j] = z.segment(static_cast<Eigen::Index>(j - 1) * d, d);
      break;
    case BoundaryKind::SubspaceEnds: {
      const auto k0 = b0_.cols(), k1 = b1_.cols();
      pts.front() = b0_ * z.head(k0);
      for (std::size_t j = 1; j + 1 < n_; ++j) pts[j] = z.segment(k0 + static_cast<Eigen::Index>(j - 1) * d, d);
      pts.back() = b1_ * z.tail(k1);
      break;
    }
    case BoundaryKind::Periodic:
      for (std::size_t j = 0; j + 1 < n_; ++j) pts[j] = z.segment(static_cast<Eigen::Index>(j) * d, d);
      pts.back() = pts.front();
      break;
  }
  return pts;
}

Vec PathVariables::pull_back(const std::vector<Vec>& partials) const {
  Vec g = Vec::Zero(static_cast<Eigen::Index>(size_));
  const auto d = static_cast<Eigen::Index>(dim_);
  switch (bc_.kind) {
    case BoundaryKind::FixedEnds:
      for (std::size_t j = 1; j + 1 < n_; ++j) g.segment(static_cast<Eigen::Index>(j - 1) * d, d) = partials[j];
      break;
    case BoundaryKind::SubspaceEnds: {
      const auto k0 = b0_.cols(), k1 = b1_.cols();
      g.head(k0) = b0_.transpose() * partials.front();
      for (std::size_t j = 1; j + 1 < n_; ++j) g.segment(k0 + static_cast<Eigen::Index>(j - 1) * d, d) = partials[j];
      g.tail(k1) = b1_.transpose() * partials.back();
      break;
    }
    case BoundaryKind::Periodic:
      for (std::size_t j = 0; j + 1 < n_; ++j) g.segment(static_cast<Eigen::Index>(j) * d, d) = partials[j];
      g.head(d) += partials.back();
      break;
  }
  return g;
}

Vec PathVariables::pack_direction(const std::vector<Vec>& direction) const {
  std::vector<Vec> dir = direction;
  dir.front().setZero();
  dir.back().setZero();
  Vec z = Vec::Zero(static_cast<Eigen::Index>(size_));
  for (std::size_t j = 1; j + 1 < n_; ++j) {
    for (int c = 0; c < dim_; ++c) {
      for (auto [idx, coef] : combination(j, c)) z(static_cast<Eigen::Index>(idx)) += coef * dir[j](c);
    }
  }
  return z;
}

namespace {

// Kinetic Hessian in the variables plus a small mass shift (which makes the
// periodic and free-end cases definite); used as the L-BFGS initial inverse Hessian.
class KineticPreconditioner {
 public:
  KineticPreconditioner(const PathVariables& vars, const Path& ref) {
    const MassMetric& m = ref.metric();
    const auto& g = ref.grid();
    const std::size_t n = ref.size();
    std::vector<Eigen::Triplet<double>> trip;
    auto add_outer = [&](const PathVariables::Combination& a, const PathVariables::Combination& b, double w) {
      for (auto [i, ci] : a)
        for (auto [k, ck] : b) trip.emplace_back(static_cast<int>(i), static_cast<int>(k), w * ci * ck);
    };
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double h = g[j + 1] - g[j];
      for (int c = 0; c < m.size(); ++c) {
        const double w = m.weights()(c) / h;
        const auto a = vars.combination(j, c), b = vars.combination(j + 1, c);
        add_outer(a, a, w);
        add_outer(b, b, w);
        add_outer(a, b, -w);
        add_outer(b, a, -w);
      }
    }
    const double shift = 1e-3;
    for (std::size_t j = 0; j < n; ++j) {
      const double hbar = 0.5 * ((j > 0 ? g[j] - g[j - 1] : 0.0) + (j + 1 < n ? g[j + 1] - g[j] : 0.0));
      for (int c = 0; c < m.size(); ++c) {
        const auto a = vars.combination(j, c);
        add_outer(a, a, shift * hbar * m.weights()(c));
      }
    }
    const auto sz = static_cast<Eigen::Index>(vars.size());
    Eigen::SparseMatrix<double> h(sz, sz);
    h.setFromTriplets(trip.begin(), trip.end());
    solver_.compute(h);
    if (solver_.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "kinetic preconditioner factorization failed");
  }

  Vec apply_inverse(const Vec& g) const { return solver_.solve(g); }

 private:
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

struct Evaluation {
  double f = kInf;
  Vec g;
  bool ok = false;
};

Evaluation evaluate(const Lagrangian& lag, const PathVariables& vars, const Path& ref, const Vec& z) {
  Evaluation e;
  std::vector<Vec> partials;
  try {
    e.f = discrete_action(ref.metric(), ref.grid(), vars.unpack(z), lag, &partials);
  } catch (const Error& err) {
    if (err.code() == ErrorCode::SingularConfiguration || err.code() == ErrorCode::NonFiniteState) return e;
    throw;
  }
  if (!std::isfinite(e.f)) return e;
  e.g = vars.pull_back(partials);
  e.ok = e.g.allFinite();
  return e;
}

double max_residual(const Path& path, const Lagrangian& lag) {
  double worst = 0.0;
  for (const auto& r : discrete_el_residual(path, lag)) worst = std::max(worst, path.metric().norm(r));
  return worst;
}

}  // namespace

MinimizeResult local_minimize(const Lagrangian& lag, const Path& init, const BoundaryCondition& bc,
                              const MinimizerOptions& opt) {
  const PathVariables vars(init, bc);
  const KineticPreconditioner precond(vars, init);
  Vec z = vars.pack(init.points());
  Evaluation cur = evaluate(lag, vars, init, z);
  if (!cur.ok) throw Error(ErrorCode::InvalidArgument, "objective is not finite at the initial path");

  std::deque<std::pair<Vec, Vec>> memory;  // (s, y)
  MinimizeResult res{init, cur.f, 0.0, 0, false, 0.0, {cur.f}, ""};
  const double c_armijo = 1e-4;

  auto direction = [&](const Vec& g) -> Vec {
    Vec q = g;
    std::vector<double> alphas(memory.size());
    for (std::size_t k = memory.size(); k-- > 0;) {
      const auto& [s, y] = memory[k];
      alphas[k] = s.dot(q) / y.dot(s);
      q -= alphas[k] * y;
    }
    Vec r = precond.apply_inverse(q);
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      r *= s.dot(y) / y.dot(precond.apply_inverse(y));
    }
    for (std::size_t k = 0; k < memory.size(); ++k) {
      const auto& [s, y] = memory[k];
      const double beta = y.dot(r) / y.dot(s);
      r += (alphas[k] - beta) * s;
    }
    return -r;
  };

  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    res.gradient_norm = cur.g.lpNorm<Eigen::Infinity>();
    if (res.gradient_norm <= opt.tol * (1.0 + std::abs(cur.f))) {
      res.converged = true;
      break;
    }
    Vec d = direction(cur.g);
    double slope = cur.g.dot(d);
    if (!(slope < 0.0)) {
      memory.clear();
      d = -precond.apply_inverse(cur.g);
      slope = cur.g.dot(d);
    }
    Evaluation next;
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double step = 1.0;
      for (int k = 0; k < 60; ++k, step *= 0.5) {
        next = evaluate(lag, vars, init, z + step * d);
        if (!next.ok) continue;
        const bool armijo = next.f <= cur.f + c_armijo * step * slope;
        // in the roundoff regime the action cannot resolve the decrease; accept
        // steps that stay within the tolerance and shrink the gradient
        const bool flat = next.f <= cur.f + 1e-12 * (1.0 + std::abs(cur.f)) &&
                          next.g.lpNorm<Eigen::Infinity>() < res.gradient_norm;
        if (armijo || flat) {
          accepted = true;
          d *= step;
          break;
        }
      }
      if (!accepted && !memory.empty()) {
        memory.clear();
        d = -precond.apply_inverse(cur.g);
        slope = cur.g.dot(d);
      } else if (!accepted) {
        break;
      }
    }
    if (!accepted) {
      if (res.gradient_norm <= 1e3 * opt.tol * (1.0 + std::abs(cur.f))) {
        res.message = "line search stalled near stationarity";
        break;
      }
      throw Error(ErrorCode::LineSearchFailure, "no acceptable step along the search direction");
    }
    const Vec y = next.g - cur.g;
    if (d.dot(y) > 1e-12 * d.norm() * y.norm()) {
      memory.emplace_back(d, y);
      if (memory.size() > opt.memory) memory.pop_front();
    }
    z += d;
    cur = std::move(next);
    res.history.push_back(cur.f);
  }
  res.gradient_norm = cur.g.lpNorm<Eigen::Infinity>();
  if (!res.converged && res.message.empty()) res.message = "maximum iterations reached";
  if (res.converged) res.message = "converged";
  res.path = Path(init.metric(), init.grid(), vars.unpack(z));
  res.action = cur.f;
  res.stationarity = max_residual(res.path, lag);
  return res;
}

SecondVariationReport second_variation_check(const Lagrangian& lag, const Path& path, const BoundaryCondition& bc,
                                             std::size_t n_probes, std::uint64_t seed, double tol) {
  const PathVariables vars(path, bc);
  const Vec z = vars.pack(path.points());
  const MassMetric& m = path.metric();
  const auto& g = path.grid();
  const double t0 = g.front(), span = path.duration();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  SecondVariationReport rep;
  rep.min_quotient = kInf;
  for (std::size_t p = 0; p < n_probes; ++p) {
    // a few low sine modes with random vector coefficients: smooth, vanishing at the ends
    const int modes = 1 + static_cast<int>(p % 3);
    std::vector<Vec> coef(static_cast<std::size_t>(modes), Vec(m.size()));
    for (auto& c : coef)
      for (int i = 0; i < c.size(); ++i) c(i) = gauss(rng);
    std::vector<Vec> dir(path.size(), Vec::Zero(m.size()));
    for (std::size_t j = 0; j < path.size(); ++j) {
      const double tau = (g[j] - t0) / span;
      for (int k = 0; k < modes; ++k) dir[j] += std::sin((k + 1) * std::numbers::pi * tau) * coef[static_cast<std::size_t>(k)];
    }
    double denom = 0.0;
    for (std::size_t j = 1; j + 1 < path.size(); ++j) denom += 0.5 * (g[j + 1] - g[j - 1]) * m.norm2(dir[j]);
    const Vec v = vars.pack_direction(dir);
    const double eps = 1e-5 * (1.0 + z.lpNorm<Eigen::Infinity>()) / (v.lpNorm<Eigen::Infinity>() + 1e-300);
    const Evaluation plus = evaluate(lag, vars, path, z + eps * v);
    const Evaluation minus = evaluate(lag, vars, path, z - eps * v);
    if (!plus.ok || !minus.ok) throw Error(ErrorCode::SingularConfiguration, "probe direction reaches the collision set");
    const double q = v.dot(plus.g - minus.g) / (2.0 * eps) / denom;
    rep.quotients.push_back(q);
    rep.min_quotient = std::min(rep.min_quotient, q);
  }
  rep.locally_minimal_candidate = rep.min_quotient >= -tol;
  return rep;
}

}  // namespace singlab
