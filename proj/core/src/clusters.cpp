#include "singlab/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "singlab/error.hpp"

namespace singlab {

CollisionLattice CollisionLattice::build(const PotentialSpec& spec) {
  for (const auto& t : spec.terms()) {
    if (const auto* a = std::get_if<term::Anisotropic>(&t); a && a->profile.singular_distance) {
      throw Error(ErrorCode::NotSubspaceArrangement, "anisotropic profile with its own singular set");
    }
  }
  return from_subspaces(spec.metric(), spec.singular_subspaces());
}

CollisionLattice CollisionLattice::from_subspaces(const MassMetric& metric, std::vector<Subspace> generators) {
  if (generators.empty()) throw Error(ErrorCode::NotSubspaceArrangement, "no collision subspaces");
  CollisionLattice lat(metric);
  lat.elements_.push_back(Subspace::whole(metric));
  lat.generator_.push_back(false);
  for (auto& g : generators) {
    if (g.ambient() != metric.size()) throw Error(ErrorCode::NotSubspaceArrangement, "subspace in the wrong ambient space");
    if (g.codim() == 0) throw Error(ErrorCode::NotSubspaceArrangement, "the whole space cannot be singular");
    if (lat.find(g)) continue;
    lat.elements_.push_back(std::move(g));
    lat.generator_.push_back(true);
  }
  lat.pairwise_ = true;
  for (std::size_t k = 1; k < lat.elements_.size() && lat.pairwise_; ++k) {
    bool found = false;
    for (int i = 0; i < metric.bodies() && !found; ++i) {
      for (int j = i + 1; j < metric.bodies() && !found; ++j) {
        found = lat.elements_[k].same_as(Subspace::coincidence(metric, i, j));
      }
    }
    lat.pairwise_ = found;
  }
  lat.close();
  return lat;
}

void CollisionLattice::close() {
  bool grew = true;
  while (grew) {
    grew = false;
    const std::size_t n = elements_.size();
    for (std::size_t a = 1; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        Subspace c = elements_[a].intersect(elements_[b]);
        if (!find(c)) {
          elements_.push_back(std::move(c));
          generator_.push_back(false);
          grew = true;
        }
      }
    }
  }
  const std::size_t n = elements_.size();
  auto below = [&](std::size_t a, std::size_t b) {
    return elements_[a].dim() < elements_[b].dim() && elements_[b].contains(elements_[a]);
  };
  edges_.clear();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (!below(a, b)) continue;
      bool covered = true;
      for (std::size_t c = 0; c < n && covered; ++c) covered = !(below(a, c) && below(c, b));
      if (covered) edges_.emplace_back(a, b);
    }
  }
}

std::optional<std::size_t> CollisionLattice::find(const Subspace& v) const {
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    if (elements_[k].same_as(v)) return k;
  }
  return std::nullopt;
}

std::vector<int> CollisionLattice::partition(std::size_t k) const {
  if (!pairwise_) return {};
  const int n = metric_.bodies();
  std::vector<int> label(static_cast<std::size_t>(n));
  std::iota(label.begin(), label.end(), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (Subspace::coincidence(metric_, i, j).contains(elements_[k])) {
        label[static_cast<std::size_t>(j)] = std::min(label[static_cast<std::size_t>(j)], label[static_cast<std::size_t>(i)]);
      }
    }
  }
  return label;
}

std::size_t CollisionLattice::mu_of(const Vec& xi, std::optional<double> tol) const {
  const double eps = tol ? *tol : 1e-8 * (1.0 + metric_.norm(xi));
  std::optional<Subspace> meet;
  for (std::size_t k = 1; k < elements_.size(); ++k) {
    if (!generator_[k] || elements_[k].distance(xi) > eps) continue;
    meet = meet ? meet->intersect(elements_[k]) : elements_[k];
  }
  if (!meet) throw Error(ErrorCode::NotOnDelta, "configuration is not on the collision set");
  const auto k = find(*meet);
  if (!k) throw Error(ErrorCode::NotSubspaceArrangement, "lattice is not closed under intersection");
  return *k;
}

double CollisionLattice::margin(const Vec& xi, std::size_t element) const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < elements_.size(); ++k) {
    if (generator_[k] && !elements_[k].contains(elements_[element])) m = std::min(m, elements_[k].distance(xi));
  }
  return m;
}

nlohmann::json CollisionLattice::to_json() const {
  nlohmann::json members = nlohmann::json::array();
  for (std::size_t k = 0; k < elements_.size(); ++k) {
    nlohmann::json e = {{"index", k}, {"dim", elements_[k].dim()}, {"generator", static_cast<bool>(generator_[k])}};
    if (pairwise_) e["clusters"] = partition(k);
    members.push_back(std::move(e));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (auto [a, b] : edges_) edges.push_back({a, b});
  return {{"members", members}, {"hasse_edges", edges}};
}

ReducedCollision reduce_partial_collision(const Path& path, const CollisionEvent& event,
                                          const CollisionLattice& lattice, const PotentialSpec& spec) {
  if (event.lattice_element >= lattice.size()) throw Error(ErrorCode::InvalidArgument, "event element outside the lattice");
  if (event.sample >= path.size()) throw Error(ErrorCode::InvalidArgument, "event sample outside the solution");
  const std::size_t k = event.lattice_element;
  const Subspace& v = lattice.element(k);
  const MassMetric& m = spec.metric();

  std::vector<std::size_t> others;
  for (std::size_t g = 1; g < lattice.size(); ++g) {
    if (lattice.is_generator(g) && !lattice.element(g).contains(v)) others.push_back(g);
  }
  auto separated = [&](std::size_t j) {
    const double w = m.norm(v.complement(path.point(j)));
    for (std::size_t g : others) {
      if (lattice.element(g).distance(path.point(j)) < 10.0 * w) return false;
    }
    return true;
  };
  if (!separated(event.sample)) throw Error(ErrorCode::AssumptionViolation, "U5: other clusters collide at the event");
  std::size_t j0 = event.sample, j1 = event.sample;
  while (j0 > 0 && separated(j0 - 1)) --j0;
  while (j1 + 1 < path.size() && separated(j1 + 1)) ++j1;
  if (j1 - j0 + 1 < 8) throw Error(ErrorCode::WindowTooShort, "fewer than 8 samples in the reduction window");

  const Vec xi = v.project(path.point(event.sample));
  const double tol = 1e-8 * (1.0 + m.norm(xi));
  const PotentialSpec singular = spec.singular_part_at(xi, std::max(tol, 2.0 * m.norm(v.complement(path.point(event.sample)))));
  std::vector<Term> regular = spec.regular_terms_at(xi, std::max(tol, 2.0 * m.norm(v.complement(path.point(event.sample)))));

  std::vector<std::size_t> idx(j1 - j0 + 1);
  std::iota(idx.begin(), idx.end(), j0);

  std::vector<double> grid;
  std::vector<Vec> wx, wv, px, pv;
  for (std::size_t j : idx) {
    grid.push_back(path.time(j));
    wx.push_back(v.complement(path.point(j)));
    wv.push_back(v.complement(path.velocity(j)));
    px.push_back(v.project(path.point(j)));
    pv.push_back(v.project(path.velocity(j)));
    // the singular part must see only the w-component
    const Vec& x = path.point(j);
    if (!singular.is_singular(x) && !singular.is_singular(wx.back())) {
      const double a = singular.evaluate(path.time(j), x), b = singular.evaluate(path.time(j), wx.back());
      if (std::abs(a - b) > 1e-8 * (1.0 + std::abs(a))) {
        throw Error(ErrorCode::AssumptionViolation, "U5: singular part depends on the projection onto the cluster subspace");
      }
    }
  }

  // Frozen p(t) as Hermite interpolants of the exact positions and velocities.
  auto p_of_t = std::make_shared<std::vector<PiecewiseCubic>>();
  for (int c = 0; c < m.size(); ++c) {
    std::vector<double> val, slope;
    for (std::size_t q = 0; q < grid.size(); ++q) {
      val.push_back(px[q][c]);
      slope.push_back(pv[q][c]);
    }
    p_of_t->push_back(PiecewiseCubic::hermite(grid, val, slope));
  }
  auto p_at = [p_of_t](double t) {
    Vec p(static_cast<int>(p_of_t->size()));
    for (int c = 0; c < p.size(); ++c) p[c] = (*p_of_t)[static_cast<std::size_t>(c)](t);
    return p;
  };
  auto pdot_at = [p_of_t](double t) {
    Vec p(static_cast<int>(p_of_t->size()));
    for (int c = 0; c < p.size(); ++c) p[c] = (*p_of_t)[static_cast<std::size_t>(c)].derivative(t);
    return p;
  };

  std::vector<Term> terms = singular.terms();
  if (!regular.empty()) {
    auto w_spec = std::make_shared<PotentialSpec>(m, PotentialKind::Custom, std::move(regular));
    for (std::size_t q = 0; q < grid.size(); ++q) {
      if (w_spec->singular_distance(path.point(idx[q])) < 10.0 * m.norm(wx[q])) {
        throw Error(ErrorCode::AssumptionViolation, "U5: remainder is singular inside the reduction window");
      }
    }
    SmoothTerm fn;
    fn.value = [w_spec, p_at](double t, const Vec& w) { return w_spec->evaluate(t, p_at(t) + w); };
    fn.gradient = [w_spec, p_at](double t, const Vec& w) { return w_spec->gradient(t, p_at(t) + w); };
    fn.rate = [w_spec, p_at, pdot_at, mm = m](double t, const Vec& w) {
      const Vec x = p_at(t) + w;
      return w_spec->partial_t(t, x) + mm.dot(w_spec->gradient(t, x), pdot_at(t));
    };
    terms.emplace_back(term::Smooth{std::move(fn)});
  }
  PotentialSpec reduced(m, PotentialKind::Custom, std::move(terms), spec.constants());

  // Second differences of p on samples thinned to a spacing that roundoff cannot dominate.
  const double span = grid.back() - grid.front();
  std::vector<double> tg;
  std::vector<Vec> tp;
  for (std::size_t q = 0; q < grid.size(); ++q) {
    if (tg.empty() || grid[q] - tg.back() >= 1e-4 * span || q + 1 == grid.size()) {
      if (!tg.empty() && q + 1 == grid.size() && grid[q] - tg.back() < 1e-4 * span) continue;
      tg.push_back(grid[q]);
      tp.push_back(px[q]);
    }
  }
  double bound = 0.0;
  for (std::size_t q = 1; q + 1 < tg.size(); ++q) {
    const double hm = tg[q] - tg[q - 1], hp = tg[q + 1] - tg[q];
    const Vec acc = 2.0 * ((tp[q + 1] - tp[q]) / hp - (tp[q] - tp[q - 1]) / hm) / (hm + hp);
    bound = std::max(bound, m.norm(acc));
  }

  Path w_path(m, grid, std::move(wx), std::move(wv));
  Path p_path(m, grid, std::move(px), std::move(pv));
  return ReducedCollision{k, lattice.partition(k), j0, j1, std::move(w_path),
                          std::move(p_path), std::move(reduced), bound};
}

}  // namespace singlab
