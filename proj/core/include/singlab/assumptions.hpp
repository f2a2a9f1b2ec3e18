#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "singlab/potential.hpp"

namespace singlab {

struct SamplerOptions {
  std::size_t count = 400;
  double r_min = 1e-6;
  double r_max = 10.0;
  double t_min = 0.0;
  double t_max = 1.0;
  /// Samples closer than separation * r to Delta are rejected.
  double separation = 1e-2;
  std::uint64_t seed = 1;
};

struct Sample {
  double t;
  Vec x;
};

/// Seeded sampler of configurations off Delta with log-uniform radii.
std::vector<Sample> sample_configurations(const PotentialSpec& spec, const SamplerOptions& options);

struct AssumptionCheck {
  std::string name;
  bool applicable = true;
  bool passed = true;
  /// Worst-case margin; negative means violated (sign convention per check).
  double margin = 0.0;
  std::string detail;
};

struct AssumptionReport {
  std::vector<AssumptionCheck> checks;

  bool all_passed() const;
  const AssumptionCheck* find(const std::string& name) const;
};

struct AssumptionOptions {
  double tol = 1e-9;
  /// Radii below this are "small |x|" for the local assumptions.
  double small_radius = 1.0;
  /// Relative tolerance for the limit assumptions at the smallest probe radius.
  double limit_tol = 1e-2;
  /// 2-plane for the (U6)/(U7) checks; omitted means those checks are skipped.
  std::optional<Subspace> plane;
  /// Degree-1 homogeneous psi of the logarithmic (U7) form, applied to the
  /// component orthogonal to the plane.
  std::function<double(const Vec&)> psi;
};

AssumptionReport check_assumptions(const PotentialSpec& spec, const SamplerOptions& sampler,
                                   const AssumptionOptions& options = {});

/// Estimates C1 and C2 (for the given gamma) as the smallest values consistent
/// with the samples.
AssumptionConstants fit_constants(const PotentialSpec& spec, const SamplerOptions& sampler, double gamma);

}  // namespace singlab
