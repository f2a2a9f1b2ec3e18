#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "singlab/collision_event.hpp"
#include "singlab/path.hpp"
#include "singlab/potential.hpp"
#include "singlab/subspace.hpp"

namespace singlab {

/// The intersection semilattice generated by the collision subspaces, with the
/// whole space as top element. For n-body arrangements the elements are the set
/// partitions of the bodies into coincident clusters.
class CollisionLattice {
 public:
  /// Generators are the maximal singular subspaces of the potential; throws
  /// NotSubspaceArrangement when a term has a non-linear singular set.
  static CollisionLattice build(const PotentialSpec& spec);
  static CollisionLattice from_subspaces(const MassMetric& metric, std::vector<Subspace> generators);

  std::size_t size() const noexcept { return elements_.size(); }
  const Subspace& element(std::size_t k) const { return elements_[k]; }
  const std::vector<Subspace>& elements() const noexcept { return elements_; }
  /// Index of the whole space.
  std::size_t top() const noexcept { return 0; }
  bool is_generator(std::size_t k) const { return generator_[k]; }
  /// Covering pairs (lower, upper): lower is a maximal proper subspace of upper.
  const std::vector<std::pair<std::size_t, std::size_t>>& hasse_edges() const noexcept { return edges_; }
  /// Cluster labels (smallest body index in each cluster) when every generator is
  /// a pair-coincidence subspace, else empty.
  std::vector<int> partition(std::size_t k) const;
  /// Element index of the given subspace, if present.
  std::optional<std::size_t> find(const Subspace& v) const;

  /// Minimal element containing xi: the intersection of all members within
  /// tol of xi. Default tol is 1e-8 (1 + |xi|). Throws NotOnDelta when xi is
  /// not within tol of any generator.
  std::size_t mu_of(const Vec& xi, std::optional<double> tol = std::nullopt) const;
  /// Distance from xi to the nearest generator not containing mu_of(xi); a
  /// measure of how safely xi was classified.
  double margin(const Vec& xi, std::size_t element) const;

  Vec project(std::size_t k, const Vec& x) const { return elements_[k].project(x); }
  Vec complement(std::size_t k, const Vec& x) const { return elements_[k].complement(x); }

  const MassMetric& metric() const noexcept { return metric_; }
  nlohmann::json to_json() const;

 private:
  CollisionLattice(MassMetric metric) : metric_(std::move(metric)) {}
  void close();

  MassMetric metric_;
  std::vector<Subspace> elements_;
  std::vector<bool> generator_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
  bool pairwise_ = false;
};

/// A partial collision rewritten as a total collision of the w-component.
struct ReducedCollision {
  std::size_t element = 0;
  std::vector<int> clusters;
  std::size_t window_begin = 0;   ///< window in the samples of the path
  std::size_t window_end = 0;
  Path w;                         ///< w_mu(x(t)) with its velocities
  Path p;                         ///< p_mu(x(t)) with its velocities
  /// U_mu(t, w) + W(t, p(t) + w) with p(t) frozen as a Hermite interpolant.
  PotentialSpec reduced;
  /// max |p''| over the window (second difference of p).
  double p_accel_bound = 0.0;
};

/// Splits the path near the event into x = p + w on the event's cluster
/// subspace. The window is the trailing (or leading) run of samples on which the
/// other clusters stay separated by at least 10 times the colliding cluster's
/// diameter. Throws AssumptionViolation when the remainder W is singular inside
/// the window and WindowTooShort when fewer than 8 samples qualify.
ReducedCollision reduce_partial_collision(const Path& path, const CollisionEvent& event,
                                          const CollisionLattice& lattice, const PotentialSpec& spec);

}  // namespace singlab
