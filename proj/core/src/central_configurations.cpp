#include "singlab/central_configurations.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "singlab/error.hpp"

namespace singlab {

namespace {

// Projector (in x coordinates, metric-orthogonal) onto the space where the
// limiting potential is not translation invariant.
struct Frame {
  Subspace free;  // complement of the intersection of all collision subspaces
};

Frame frame_of(const PotentialSpec& spec) {
  const MassMetric& m = spec.metric();
  Subspace meet = Subspace::whole(m);
  for (const auto& v : spec.singular_subspaces()) meet = meet.intersect(v);
  return {meet.orthogonal_complement()};
}

struct Objective {
  const PotentialSpec* spec;
  const Subspace* free;

  // Value and tangential gradient at a unit s in the free subspace; +inf off the domain.
  double value(const Vec& s) const {
    if (spec->is_singular(s)) return std::numeric_limits<double>::infinity();
    return spec->limit_potential(0.0, s);
  }
  Vec tangential(const Vec& s) const { return free->project(spec->limit_tangential_gradient(0.0, s)); }
};

Vec normalize(const MassMetric& m, const Vec& x) { return x / m.norm(x); }

// Projected BFGS descent on the unit sphere of the free subspace.
bool descend(const Objective& f, const MassMetric& m, Vec& s, const CentralSearchOptions& opt) {
  const int n = static_cast<int>(s.size());
  Mat h = Mat::Identity(n, n);
  double fs = f.value(s);
  Vec g = f.tangential(s);
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    if (m.norm(g) <= 1e-6) return true;
    Vec d = -f.free->project(h * m.lower(g));
    d -= m.dot(d, s) * s;
    if (m.dot(d, g) >= 0.0) {
      h.setIdentity();
      d = -g;
    }
    double step = 1.0;
    const double slope = m.dot(d, g);
    Vec s_new;
    double f_new = 0.0;
    bool ok = false;
    for (int k = 0; k < 60; ++k) {
      s_new = normalize(m, s + step * d);
      f_new = f.value(s_new);
      if (std::isfinite(f_new) && f_new <= fs + 1e-4 * step * slope) {
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok) return m.norm(g) <= 1e-4;
    const Vec g_new = f.tangential(s_new);
    const Vec ds = m.lower(s_new - s);
    const Vec dy = g_new - g;
    const double sy = ds.dot(dy);
    if (sy > 1e-14) {
      const double rho = 1.0 / sy;
      const Mat i = Mat::Identity(n, n);
      h = (i - rho * dy * ds.transpose()).transpose() * h * (i - rho * dy * ds.transpose()) +
          rho * (s_new - s) * (s_new - s).transpose();
    }
    s = s_new;
    fs = f_new;
    g = g_new;
  }
  return false;
}

// Newton iterations on the tangential gradient with a finite-difference Jacobian
// in an orthonormal tangent basis; least squares handles symmetry null directions.
bool polish(const Objective& f, const MassMetric& m, Vec& s, double tol) {
  for (int it = 0; it < 30; ++it) {
    const Vec g = f.tangential(s);
    if (m.norm(g) <= tol) return true;
    // tangent basis: free basis minus the s direction, mass-orthonormal
    const Mat fb = f.free->basis();
    Mat t(s.size(), fb.cols());
    int k = 0;
    for (int c = 0; c < fb.cols(); ++c) {
      Vec e = fb.col(c);
      e -= m.dot(e, s) * s;
      for (int q = 0; q < k; ++q) e -= m.dot(e, t.col(q)) * t.col(q);
      const double ne = m.norm(e);
      if (ne > 1e-8) t.col(k++) = e / ne;
    }
    t.conservativeResize(Eigen::NoChange, k);
    const double h = 1e-6;
    Mat jac(k, k);
    Vec rhs(k);
    for (int a = 0; a < k; ++a) rhs[a] = m.dot(t.col(a), g);
    for (int b = 0; b < k; ++b) {
      const Vec gp = f.tangential(normalize(m, s + h * t.col(b)));
      const Vec gm = f.tangential(normalize(m, s - h * t.col(b)));
      for (int a = 0; a < k; ++a) jac(a, b) = m.dot(t.col(a), gp - gm) / (2.0 * h);
    }
    const Vec c = jac.completeOrthogonalDecomposition().solve(-rhs);
    const Vec s_new = normalize(m, s + t * c);
    if (!std::isfinite(f.value(s_new))) return false;
    if (m.norm(f.tangential(s_new)) > m.norm(g) && it > 3) return m.norm(g) <= 1e3 * tol;
    s = s_new;
  }
  return m.norm(f.tangential(s)) <= 1e3 * tol;
}

}  // namespace

bool rotation_invariant(const PotentialSpec& spec) {
  for (const auto& t : spec.terms()) {
    if (!std::holds_alternative<term::PairPower>(t) && !std::holds_alternative<term::PairLog>(t) &&
        !std::holds_alternative<term::CenterPower>(t) && !std::holds_alternative<term::CenterLog>(t)) {
      return false;
    }
  }
  return true;
}

Vec align_rotation(const MassMetric& m, const Vec& a, const Vec& b) {
  const int d = m.dim();
  Mat cov = Mat::Zero(d, d);
  for (int i = 0; i < m.bodies(); ++i) cov += m.mass(i) * m.body(a, i) * m.body(b, i).transpose();
  Eigen::JacobiSVD<Mat> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat corr = Mat::Identity(d, d);
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) corr(d - 1, d - 1) = -1.0;
  const Mat r = svd.matrixU() * corr * svd.matrixV().transpose();
  Vec out(b.size());
  for (int i = 0; i < m.bodies(); ++i) m.body(out, i) = r * m.body(b, i);
  return out;
}

double distance_to_set(const MassMetric& m, const Vec& s, const CentralConfigurationSet& set, bool modulo_rotations) {
  if (set.degenerate) return 0.0;
  if (set.members.empty()) throw Error(ErrorCode::EmptyCentralSet, "no central configurations to compare with");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : set.members) {
    const Vec cc = modulo_rotations ? align_rotation(m, s, c.s) : c.s;
    best = std::min(best, m.norm(s - cc));
  }
  return best;
}

CentralConfigurationSet find_central_configurations(const PotentialSpec& spec, const CentralSearchOptions& opt) {
  const MassMetric& m = spec.metric();
  const Frame fr = frame_of(spec);
  if (fr.free.dim() == 0) throw Error(ErrorCode::InvalidArgument, "limiting potential has no angular variable");
  const Objective f{&spec, &fr.free};
  const bool rot = rotation_invariant(spec) && m.dim() > 1;

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  auto random_start = [&] {
    for (int tries = 0; tries < 100; ++tries) {
      const Mat b = fr.free.basis();
      Vec c(b.cols());
      for (int k = 0; k < c.size(); ++k) c[k] = normal(rng);
      const Vec s = normalize(m, b * c);
      if (std::isfinite(f.value(s))) return s;
    }
    throw Error(ErrorCode::NoConvergence, "no regular starting configuration found");
  };

  CentralConfigurationSet out;
  std::vector<Vec> starts;
  double max_start_gradient = 0.0, min_level = std::numeric_limits<double>::infinity(), max_level = 0.0;
  for (std::size_t k = 0; k < opt.starts; ++k) {
    starts.push_back(random_start());
    max_start_gradient = std::max(max_start_gradient, m.norm(f.tangential(starts.back())));
    const double lv = f.value(starts.back());
    min_level = std::min(min_level, lv);
    max_level = std::max(max_level, lv);
  }
  if (max_start_gradient <= opt.tol && max_level - min_level <= 1e-12 * (1.0 + std::abs(max_level))) {
    out.degenerate = true;
    out.members.push_back({starts.front(), f.value(starts.front()), max_start_gradient});
    return out;
  }
  for (Vec s : starts) {
    if (!descend(f, m, s, opt)) continue;
    if (!polish(f, m, s, opt.tol)) continue;
    const double level = f.value(s);
    if (opt.level && std::abs(level - *opt.level) > 1e-6 * (1.0 + std::abs(*opt.level))) continue;
    bool duplicate = false;
    for (const auto& c : out.members) {
      const Vec cc = rot ? align_rotation(m, s, c.s) : c.s;
      duplicate = duplicate || m.norm(s - cc) < opt.dedup;
    }
    if (!duplicate) out.members.push_back({s, level, m.norm(f.tangential(s))});
  }
  std::sort(out.members.begin(), out.members.end(),
            [](const CentralConfiguration& a, const CentralConfiguration& b) { return a.level < b.level; });
  return out;
}

}  // namespace singlab
