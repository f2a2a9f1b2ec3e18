#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "singlab/minimizer.hpp"
#include "singlab/path.hpp"
#include "singlab/potential.hpp"

namespace singlab {

/// The C^1 cutoff: s on [0,1], (-s^2 + 6s - 1)/4 on [1,3], 2 beyond.
double eta(double s);
/// Its derivative, using the left formula at the knots.
double eta_prime(double s);
/// eta_eps(s) = eta(eps s) / eps.
double eta_eps(double eps, double s);
double eta_eps_prime(double eps, double s);

/// Sentinel for the unregularized problem.
inline constexpr double kNoCutoff = std::numeric_limits<double>::infinity();

/// U_eps = eta_eps(U) off Delta and 2/eps on Delta; U itself when eps is kNoCutoff.
double u_eps(const PotentialSpec& spec, double eps, double t, const Vec& x);
/// Metric gradient eta'(eps U) grad U (zero on Delta).
Vec u_eps_gradient(const PotentialSpec& spec, double eps, double t, const Vec& x);

/// Minimizing K + U_eps + |x - anchor|^2 / 2 over paths on the anchor's grid
/// with the anchor's end values.
struct PenalizedProblem {
  const PotentialSpec* spec;
  Path anchor;
  double epsilon = kNoCutoff;

  Lagrangian lagrangian() const;
};

/// Checks the candidate against the anchor's grid (GridMismatch) and ends
/// (BoundaryMismatch).
double penalized_action(const PenalizedProblem& problem, const Path& candidate);
/// The penalty part alone: trapezoid rule of |x - anchor|^2 / 2.
double penalty(const PenalizedProblem& problem, const Path& candidate);

struct SweepRecord {
  double epsilon = 0.0;
  double action = 0.0;      ///< penalized action of the minimizer
  double penalty = 0.0;
  double sup_dist = 0.0;    ///< max_j |x_eps - anchor|
  double l2_vel_dist = 0.0; ///< L2 distance of the cell velocities
  double u_l1_dist = 0.0;   ///< L1 distance of U_eps(x_eps) to U(anchor) off collision samples
  bool converged = false;
  std::size_t iterations = 0;
  std::string error;        ///< non-empty when the minimization failed
  std::optional<Path> path;
};

/// eps_k = eps0 2^{-k}, with 1/eps0 = 2 median U along the anchor.
std::vector<double> default_schedule(const PenalizedProblem& problem, std::size_t count);

/// Minimizes the penalized action for every eps, starting each run from the
/// anchor (or from `init` when given). Failures are recorded and the sweep continues.
std::vector<SweepRecord> epsilon_sweep(const PenalizedProblem& problem, const std::vector<double>& schedule,
                                       const MinimizerOptions& options, const std::optional<Path>& init = std::nullopt);

nlohmann::json sweep_to_json(const std::vector<SweepRecord>& records);

}  // namespace singlab
