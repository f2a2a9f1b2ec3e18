#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "singlab/linalg.hpp"

namespace singlab {

enum class CollisionSide { Left, Right, Interior };
enum class CollisionKind { Total, Partial };

std::string to_string(CollisionSide side);
std::string to_string(CollisionKind kind);

/// A detected singularity of a path or solution.
struct CollisionEvent {
  double t_star = 0.0;            ///< collision time estimate
  CollisionSide side = CollisionSide::Left;  ///< Left: approached as t increases to t*
  Vec limit;                      ///< limit configuration (last sample projected onto its cluster subspace)
  std::size_t lattice_element = 0;
  std::vector<int> clusters;      ///< cluster label per body (n-body arrangements), else empty
  CollisionKind kind = CollisionKind::Total;
  std::size_t sample = 0;         ///< sample closest to the collision
  std::size_t window_begin = 0;   ///< first sample of the monotone approach window
  std::size_t window_end = 0;     ///< last sample of the window (inclusive)
};

}  // namespace singlab
