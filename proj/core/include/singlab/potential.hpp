#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "singlab/linalg.hpp"
#include "singlab/mass_metric.hpp"
#include "singlab/piecewise_cubic.hpp"
#include "singlab/subspace.hpp"

namespace singlab {

enum class PotentialKind {
  HomogeneousNBody,
  OneCenter,
  QuasiHomogeneous,
  LogarithmicNBody,
  LogarithmicOneCenter,
  AnisotropicHomogeneous,
  SubspaceDistance,
  Custom,
};

std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& name);

/// Constants entering the growth assumptions on U.
struct AssumptionConstants {
  double c1 = 0.0;     ///< |dU/dt| <= C1 (U + 1)
  double c2 = 0.0;     ///< grad U . x + alpha U >= -C2 |x|^gamma U
  double gamma = 1.0;  ///< remainder exponent, > 0
  std::optional<double> alpha_tilde;  ///< relaxed exponent; defaults to (alpha + 2) / 2
};

/// Angular profile of an anisotropic alpha-homogeneous term r^{-alpha} f(s).
/// `gradient` is the metric gradient of any smooth extension of f; only its
/// tangential part is used.
struct AngularProfile {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  /// Distance of a unit configuration to the singular set of f; empty means f is
  /// regular on the whole ellipsoid.
  std::function<double(const Vec&)> singular_distance;
};

/// A C^1 remainder W(t, x); all callbacks must be thread-safe.
struct SmoothTerm {
  std::function<double(double, const Vec&)> value;
  std::function<Vec(double, const Vec&)> gradient;  ///< metric gradient
  std::function<double(double, const Vec&)> rate;   ///< dW/dt, empty means 0
};

namespace term {

using PairList = std::vector<std::pair<int, int>>;

/// weight * m_i(t) m_j(t) |x_i - x_j|^{-exponent} over `pairs` (all pairs when empty).
struct PairPower {
  double exponent;
  double weight = 1.0;
  PairList pairs = {};
};

/// -weight * m_i(t) m_j(t) log |x_i - x_j|.
struct PairLog {
  double weight = 1.0;
  PairList pairs = {};
};

/// c(t) |x|^{-exponent}, |x| the metric norm.
struct CenterPower {
  double exponent;
  PiecewiseCubic weight{1.0};
};

/// -M(t) log |x|.
struct CenterLog {
  PiecewiseCubic weight{1.0};
};

/// weight * dist(x, V)^{-exponent}; codim V >= 2.
struct SubspacePower {
  Subspace space;
  double weight;
  double exponent;
};

/// -weight * log dist(x, V); codim V >= 2.
struct SubspaceLog {
  Subspace space;
  double weight;
};

/// weight * Q(x)^{-exponent/2} with Q(x) = x^T A x, A symmetric positive definite.
struct QuadraticPower {
  Mat form;
  double weight;
  double exponent;
};

struct Anisotropic {
  double exponent;
  AngularProfile profile;
};

struct Smooth {
  SmoothTerm fn;
};

}  // namespace term

using Term = std::variant<term::PairPower, term::PairLog, term::CenterPower, term::CenterLog,
                          term::SubspacePower, term::SubspaceLog, term::QuadraticPower,
                          term::Anisotropic, term::Smooth>;

/// A singular potential U(t, x) on R^{n d} \ Delta, built as a sum of terms.
///
/// The limiting potential is the sum of the terms with the leading (largest)
/// homogeneity exponent; when only logarithmic terms are singular, it is the
/// sum of the logarithmic terms. Smooth terms never enter the limit.
///
/// Immutable after construction; all queries are const and thread-safe provided
/// user callbacks are.
class PotentialSpec {
 public:
  /// Configurations closer than floor_factor * (1 + |x|) to Delta are refused.
  static constexpr double kSingularityFloor = 1e-13;

  PotentialSpec(MassMetric metric, PotentialKind kind, std::vector<Term> terms,
                AssumptionConstants constants = {});

  // Factories for the admissible class.
  static PotentialSpec homogeneous_n_body(MassMetric metric, double alpha);
  static PotentialSpec one_center(int dim, double alpha, double weight = 1.0);
  /// U = U_alpha + lambda U_beta, one-center when bodies == 1 else n-body.
  static PotentialSpec quasi_homogeneous(MassMetric metric, double alpha, double beta, double lambda);
  static PotentialSpec logarithmic_n_body(MassMetric metric);
  static PotentialSpec logarithmic_one_center(int dim, PiecewiseCubic m_of_t = PiecewiseCubic(1.0));
  static PotentialSpec anisotropic(MassMetric metric, double alpha, AngularProfile profile);
  /// sum_nu K_nu dist(x, V_nu)^{-alpha}; pass alpha = 0 for the logarithmic form
  /// -sum_nu K_nu log dist(x, V_nu).
  static PotentialSpec subspace_distance(MassMetric metric, double alpha,
                                         std::vector<std::pair<double, Subspace>> weighted_spaces);
  /// The reduced potential K(N)/|u|^alpha + U_0(u, zeta) of the hip-hop 2N-body
  /// problem on (u, zeta) in R^2 x R.
  static PotentialSpec hip_hop_reduced(int n, double alpha);
  /// K(N) = sum_{k=1}^{N-1} sin^{-alpha}(k pi / N).
  static double hip_hop_constant(int n, double alpha);

  const MassMetric& metric() const noexcept { return metric_; }
  PotentialKind kind() const noexcept { return kind_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  const AssumptionConstants& constants() const noexcept { return constants_; }
  PotentialSpec with_constants(AssumptionConstants constants) const;
  PotentialSpec with_extra_terms(std::vector<Term> extra, PotentialKind kind = PotentialKind::Custom) const;

  bool is_logarithmic() const noexcept { return logarithmic_; }
  bool is_time_dependent() const noexcept { return time_dependent_; }
  /// Leading homogeneity exponent (0 for logarithmic potentials).
  double alpha() const noexcept { return alpha_; }
  double alpha_tilde() const noexcept;

  /// M(t), the coefficient of -log|x| in the logarithmic case (0 otherwise).
  double log_coefficient(double t) const;
  double log_coefficient_rate(double t) const;

  double evaluate(double t, const Vec& x) const;
  /// Metric gradient M^{-1} dU/dx.
  Vec gradient(double t, const Vec& x) const;
  /// dU/dt; throws AssumptionViolation when |dU/dt| > C1 (U + 1) and
  /// `check_c1` is set.
  double partial_t(double t, const Vec& x, bool check_c1 = false) const;

  /// Distance (metric) from x to the collision set Delta.
  double singular_distance(const Vec& x) const;
  bool is_singular(const Vec& x) const;
  /// Nearest point of the union of singular components (pairs merged to their
  /// centre of mass, subspace terms projected, central terms to the origin).
  Vec nearest_singular_point(const Vec& x) const;
  /// Linear subspaces whose union is Delta (maximal components).
  std::vector<Subspace> singular_subspaces() const;

  /// Limiting potential on the inertia ellipsoid; throws SingularDirection when s is in Delta.
  double limit_potential(double t, const Vec& s) const;
  /// Tangential metric gradient of the limiting potential at the unit configuration s.
  Vec limit_tangential_gradient(double t, const Vec& s) const;
  /// The limiting potential extended to the whole space (homogeneous or
  /// log-homogeneous extension), as its own spec.
  PotentialSpec limit_spec() const;

  /// Terms that are singular at xi (pairs restricted to the coinciding ones).
  PotentialSpec singular_part_at(const Vec& xi, double tol) const;
  /// The remaining terms (may be empty).
  std::vector<Term> regular_terms_at(const Vec& xi, double tol) const;

 private:
  MassMetric metric_;
  PotentialKind kind_;
  std::vector<Term> terms_;
  AssumptionConstants constants_;
  double alpha_ = 0.0;
  bool logarithmic_ = false;
  bool time_dependent_ = false;
};

}  // namespace singlab
