#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "singlab/path.hpp"
#include "singlab/subspace.hpp"

namespace singlab {

enum class BoundaryKind { FixedEnds, SubspaceEnds, Periodic };

/// Fixed ends keep the first and last nodes; subspace ends keep them on X0 and
/// X1 (parametrized by basis coordinates, so the constraint holds exactly);
/// periodic identifies the last node with the first.
struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::FixedEnds;
  std::optional<Subspace> start;
  std::optional<Subspace> end;

  static BoundaryCondition fixed_ends() { return {}; }
  static BoundaryCondition subspace_ends(Subspace x0, Subspace x1) {
    return {BoundaryKind::SubspaceEnds, std::move(x0), std::move(x1)};
  }
  static BoundaryCondition periodic() { return {BoundaryKind::Periodic, std::nullopt, std::nullopt}; }
};

struct MinimizerOptions {
  /// Stop when the infinity norm of the gradient is <= tol * (1 + |A|).
  double tol = 1e-9;
  std::size_t max_iter = 20000;
  std::size_t memory = 12;
  std::uint64_t seed = 1;
};

struct MinimizeResult {
  Path path;
  double action = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Max over interior nodes of the Euler-Lagrange residual (metric norm).
  double stationarity = 0.0;
  std::vector<double> history;
  std::string message;
};

/// Minimizes the discrete action of `lagrangian` starting from `init`.
/// Throws BoundaryMismatch if `init` violates the boundary condition and
/// LineSearchFailure if no descent step can be found away from a stationary point.
MinimizeResult local_minimize(const Lagrangian& lagrangian, const Path& init, const BoundaryCondition& bc,
                              const MinimizerOptions& options = {});

/// The free variables of a path under a boundary condition.
class PathVariables {
 public:
  /// Index/coefficient pairs expressing one node coordinate in the variables.
  using Combination = std::vector<std::pair<std::size_t, double>>;

  PathVariables(const Path& reference, const BoundaryCondition& bc);

  std::size_t size() const noexcept { return size_; }
  Vec pack(const std::vector<Vec>& points) const;
  std::vector<Vec> unpack(const Vec& z) const;
  /// Chain rule from node partials to variable partials.
  Vec pull_back(const std::vector<Vec>& partials) const;
  /// Node-space direction that vanishes at the ends, mapped to variables.
  Vec pack_direction(const std::vector<Vec>& direction) const;
  /// Node j, coordinate c as a combination of variables (empty when fixed).
  Combination combination(std::size_t j, int c) const;

 private:
  BoundaryCondition bc_;
  Vec first_, last_;
  std::size_t n_;
  int dim_;
  std::size_t size_;
  Mat b0_, b1_;
};

struct SecondVariationReport {
  std::vector<double> quotients;
  double min_quotient = 0.0;
  bool locally_minimal_candidate = false;
};

/// Rayleigh quotients v.Hv / sum_j hbar_j |v_j|^2 of the discrete second
/// variation along random smooth directions that vanish at the ends. The
/// Hessian-vector products are central differences of the exact gradient.
SecondVariationReport second_variation_check(const Lagrangian& lagrangian, const Path& path,
                                             const BoundaryCondition& bc, std::size_t n_probes,
                                             std::uint64_t seed = 1, double tol = 1e-8);

}  // namespace singlab
