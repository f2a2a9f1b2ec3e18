#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "singlab/potential.hpp"

namespace singlab {

struct CentralConfiguration {
  Vec s;                  ///< unit configuration (mass metric), centred on the minimal collision subspace
  double level = 0.0;     ///< U~(s)
  double gradient = 0.0;  ///< |grad_T U~(s)| at the returned point
};

struct CentralConfigurationSet {
  std::vector<CentralConfiguration> members;
  /// U~ is constant on the ellipsoid: every configuration is central.
  bool degenerate = false;
};

struct CentralSearchOptions {
  std::size_t starts = 32;
  std::uint64_t seed = 1;
  double tol = 1e-10;          ///< tangential gradient tolerance
  std::size_t max_iter = 2000;
  double dedup = 1e-6;         ///< distance below which two results are merged
  std::optional<double> level; ///< keep only members with U~ = level
};

/// Critical points of the limiting potential on the inertia ellipsoid, by
/// projected BFGS descent from random starts followed by Newton polishing on the
/// tangential gradient. Starts that fail to converge are skipped. For
/// rotation-invariant n-body potentials, members are compared modulo rotations.
CentralConfigurationSet find_central_configurations(const PotentialSpec& spec, const CentralSearchOptions& options = {});

/// The rotation (applied to every body of b) that best aligns b with a in the
/// mass metric; returns the rotated b.
Vec align_rotation(const MassMetric& metric, const Vec& a, const Vec& b);

/// Distance from s to the set, modulo rotations when `modulo_rotations`.
double distance_to_set(const MassMetric& metric, const Vec& s, const CentralConfigurationSet& set, bool modulo_rotations);

/// True for potentials built only from pair interactions.
bool rotation_invariant(const PotentialSpec& spec);

}  // namespace singlab
