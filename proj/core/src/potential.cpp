#include "singlab/potential.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "singlab/error.hpp"

namespace singlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

term::PairList expand_pairs(const term::PairList& pairs, int n) {
  if (!pairs.empty()) return pairs;
  term::PairList all;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) all.emplace_back(i, j);
  return all;
}

double reduced_mass_factor(const MassMetric& metric, int i, int j) {
  const double mi = metric.mass(i), mj = metric.mass(j);
  return std::sqrt(mi * mj / (mi + mj));
}

bool is_power_term(const Term& t) {
  return std::holds_alternative<term::PairPower>(t) || std::holds_alternative<term::CenterPower>(t) ||
         std::holds_alternative<term::SubspacePower>(t) || std::holds_alternative<term::QuadraticPower>(t) ||
         std::holds_alternative<term::Anisotropic>(t);
}

bool is_log_term(const Term& t) {
  return std::holds_alternative<term::PairLog>(t) || std::holds_alternative<term::CenterLog>(t) ||
         std::holds_alternative<term::SubspaceLog>(t);
}

double power_exponent(const Term& t) {
  return std::visit(overloaded{
                        [](const term::PairPower& p) { return p.exponent; },
                        [](const term::CenterPower& p) { return p.exponent; },
                        [](const term::SubspacePower& p) { return p.exponent; },
                        [](const term::QuadraticPower& p) { return p.exponent; },
                        [](const term::Anisotropic& p) { return p.exponent; },
                        [](const auto&) { return 0.0; },
                    },
                    t);
}

struct TermEval {
  const MassMetric& metric;
  double t;

  double value(const Term& term, const Vec& x) const {
    return std::visit(
        overloaded{
            [&](const term::PairPower& p) {
              double sum = 0.0;
              for (auto [i, j] : expand_pairs(p.pairs, metric.bodies())) {
                const double r = (metric.body(x, i) - metric.body(x, j)).norm();
                sum += metric.coupling(i, t) * metric.coupling(j, t) * std::pow(r, -p.exponent);
              }
              return p.weight * sum;
            },
            [&](const term::PairLog& p) {
              double sum = 0.0;
              for (auto [i, j] : expand_pairs(p.pairs, metric.bodies())) {
                const double r = (metric.body(x, i) - metric.body(x, j)).norm();
                sum -= metric.coupling(i, t) * metric.coupling(j, t) * std::log(r);
              }
              return p.weight * sum;
            },
            [&](const term::CenterPower& p) { return p.weight(t) * std::pow(metric.norm(x), -p.exponent); },
            [&](const term::CenterLog& p) { return -p.weight(t) * std::log(metric.norm(x)); },
            [&](const term::SubspacePower& p) { return p.weight * std::pow(p.space.distance(x), -p.exponent); },
            [&](const term::SubspaceLog& p) { return -p.weight * std::log(p.space.distance(x)); },
            [&](const term::QuadraticPower& p) {
              const double q = x.dot(p.form * x);
              return p.weight * std::pow(q, -0.5 * p.exponent);
            },
            [&](const term::Anisotropic& p) {
              const double r = metric.norm(x);
              return std::pow(r, -p.exponent) * p.profile.value(x / r);
            },
            [&](const term::Smooth& s) { return s.fn.value(t, x); },
        },
        term);
  }

  Vec gradient(const Term& term, const Vec& x) const {
    return std::visit(
        overloaded{
            [&](const term::PairPower& p) {
              Vec partial = Vec::Zero(x.size());
              for (auto [i, j] : expand_pairs(p.pairs, metric.bodies())) {
                const Vec rij = metric.body(x, i) - metric.body(x, j);
                const double r = rij.norm();
                const double c = p.weight * metric.coupling(i, t) * metric.coupling(j, t);
                const Vec g = -p.exponent * c * std::pow(r, -p.exponent - 2.0) * rij;
                metric.body(partial, i) += g;
                metric.body(partial, j) -= g;
              }
              return metric.raise(partial);
            },
            [&](const term::PairLog& p) {
              Vec partial = Vec::Zero(x.size());
              for (auto [i, j] : expand_pairs(p.pairs, metric.bodies())) {
                const Vec rij = metric.body(x, i) - metric.body(x, j);
                const double c = p.weight * metric.coupling(i, t) * metric.coupling(j, t);
                const Vec g = -c * rij / rij.squaredNorm();
                metric.body(partial, i) += g;
                metric.body(partial, j) -= g;
              }
              return metric.raise(partial);
            },
            [&](const term::CenterPower& p) -> Vec {
              const double r = metric.norm(x);
              return -p.exponent * p.weight(t) * std::pow(r, -p.exponent - 2.0) * x;
            },
            [&](const term::CenterLog& p) -> Vec { return -p.weight(t) * x / metric.norm2(x); },
            [&](const term::SubspacePower& p) -> Vec {
              const Vec c = p.space.complement(x);
              const double d = metric.norm(c);
              return -p.exponent * p.weight * std::pow(d, -p.exponent - 2.0) * c;
            },
            [&](const term::SubspaceLog& p) -> Vec {
              const Vec c = p.space.complement(x);
              return -p.weight * c / metric.norm2(c);
            },
            [&](const term::QuadraticPower& p) -> Vec {
              const Vec ax = p.form * x;
              const double q = x.dot(ax);
              return metric.raise(-p.exponent * p.weight * std::pow(q, -0.5 * p.exponent - 1.0) * ax);
            },
            [&](const term::Anisotropic& p) -> Vec {
              const double r = metric.norm(x);
              const Vec s = x / r;
              const double f = p.profile.value(s);
              Vec g = p.profile.gradient(s);
              g -= metric.dot(g, s) * s;
              return std::pow(r, -p.exponent - 1.0) * (g - p.exponent * f * s);
            },
            [&](const term::Smooth& s) -> Vec { return s.fn.gradient(t, x); },
        },
        term);
  }

  double rate(const Term& term, const Vec& x) const {
    return std::visit(
        overloaded{
            [&](const term::PairPower& p) {
              if (!metric.time_varying()) return 0.0;
              double sum = 0.0;
              for (auto [i, j] : expand_pairs(p.pairs, metric.bodies())) {
                const double r = (metric.body(x, i) - metric.body(x, j)).norm();
                const double dc = metric.coupling_rate(i, t) * metric.coupling(j, t) +
                                  metric.coupling(i, t) * metric.coupling_rate(j, t);
                sum += dc * std::pow(r, -p.exponent);
              }
              return p.weight * sum;
            },
            [&](const term::PairLog& p) {
              if (!metric.time_varying()) return 0.0;
              double sum = 0.0;
              for (auto [i, j] : expand_pairs(p.pairs, metric.bodies())) {
                const double r = (metric.body(x, i) - metric.body(x, j)).norm();
                const double dc = metric.coupling_rate(i, t) * metric.coupling(j, t) +
                                  metric.coupling(i, t) * metric.coupling_rate(j, t);
                sum -= dc * std::log(r);
              }
              return p.weight * sum;
            },
            [&](const term::CenterPower& p) {
              return p.weight.derivative(t) * std::pow(metric.norm(x), -p.exponent);
            },
            [&](const term::CenterLog& p) { return -p.weight.derivative(t) * std::log(metric.norm(x)); },
            [&](const term::Smooth& s) { return s.fn.rate ? s.fn.rate(t, x) : 0.0; },
            [&](const auto&) { return 0.0; },
        },
        term);
  }

  double distance(const Term& term, const Vec& x) const {
    return std::visit(
        overloaded{
            [&](const term::PairPower& p) {
              double best = kInf;
              for (auto [i, j] : expand_pairs(p.pairs, metric.bodies())) {
                const double r = (metric.body(x, i) - metric.body(x, j)).norm();
                best = std::min(best, r * reduced_mass_factor(metric, i, j));
              }
              return best;
            },
            [&](const term::PairLog& p) {
              double best = kInf;
              for (auto [i, j] : expand_pairs(p.pairs, metric.bodies())) {
                const double r = (metric.body(x, i) - metric.body(x, j)).norm();
                best = std::min(best, r * reduced_mass_factor(metric, i, j));
              }
              return best;
            },
            [&](const term::SubspacePower& p) { return p.space.distance(x); },
            [&](const term::SubspaceLog& p) { return p.space.distance(x); },
            [&](const term::Anisotropic& p) {
              const double r = metric.norm(x);
              if (!p.profile.singular_distance || r == 0.0) return r;
              return std::min(r, r * p.profile.singular_distance(x / r));
            },
            [&](const term::Smooth&) { return kInf; },
            [&](const auto&) { return metric.norm(x); },
        },
        term);
  }
};

void validate_term(const Term& term, const MassMetric& metric) {
  const double e = power_exponent(term);
  if (is_power_term(term) && !(e > 0.0 && e < 2.0)) {
    throw Error(ErrorCode::InvalidArgument, "homogeneity exponents must lie in (0, 2)");
  }
  auto check_pairs = [&](const term::PairList& pairs) {
    for (auto [i, j] : pairs) {
      if (i == j || i < 0 || j < 0 || i >= metric.bodies() || j >= metric.bodies()) {
        throw Error(ErrorCode::InvalidArgument, "pair term references an invalid body");
      }
    }
  };
  std::visit(overloaded{
                 [&](const term::PairPower& p) {
                   if (metric.bodies() < 2) throw Error(ErrorCode::InvalidArgument, "pair term needs >= 2 bodies");
                   check_pairs(p.pairs);
                 },
                 [&](const term::PairLog& p) {
                   if (metric.bodies() < 2) throw Error(ErrorCode::InvalidArgument, "pair term needs >= 2 bodies");
                   check_pairs(p.pairs);
                 },
                 [&](const term::SubspacePower& p) {
                   if (p.space.codim() < 2) throw Error(ErrorCode::InvalidArgument, "subspace terms need codim >= 2");
                   if (!(p.weight > 0.0)) throw Error(ErrorCode::InvalidArgument, "subspace weights must be positive");
                 },
                 [&](const term::SubspaceLog& p) {
                   if (p.space.codim() < 2) throw Error(ErrorCode::InvalidArgument, "subspace terms need codim >= 2");
                   if (!(p.weight > 0.0)) throw Error(ErrorCode::InvalidArgument, "subspace weights must be positive");
                 },
                 [&](const term::QuadraticPower& p) {
                   if (p.form.rows() != metric.size() || p.form.cols() != metric.size()) {
                     throw Error(ErrorCode::InvalidArgument, "quadratic form has the wrong size");
                   }
                   if ((p.form - p.form.transpose()).norm() > 1e-12 * (1.0 + p.form.norm())) {
                     throw Error(ErrorCode::InvalidArgument, "quadratic form must be symmetric");
                   }
                   Eigen::SelfAdjointEigenSolver<Mat> eig(p.form);
                   if (!(eig.eigenvalues().minCoeff() > 0.0)) {
                     throw Error(ErrorCode::InvalidArgument, "quadratic form must be positive definite");
                   }
                 },
                 [&](const term::Anisotropic& p) {
                   if (!p.profile.value || !p.profile.gradient) {
                     throw Error(ErrorCode::InvalidArgument, "anisotropic profile needs value and gradient");
                   }
                 },
                 [&](const term::Smooth& s) {
                   if (!s.fn.value || !s.fn.gradient) {
                     throw Error(ErrorCode::InvalidArgument, "smooth term needs value and gradient");
                   }
                 },
                 [&](const auto&) {},
             },
             term);
}

}  // namespace

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::HomogeneousNBody: return "homogeneous_n_body";
    case PotentialKind::OneCenter: return "one_center";
    case PotentialKind::QuasiHomogeneous: return "quasi_homogeneous";
    case PotentialKind::LogarithmicNBody: return "logarithmic_n_body";
    case PotentialKind::LogarithmicOneCenter: return "logarithmic_one_center";
    case PotentialKind::AnisotropicHomogeneous: return "anisotropic";
    case PotentialKind::SubspaceDistance: return "subspace_distance";
    case PotentialKind::Custom: return "custom";
  }
  return "custom";
}

PotentialKind potential_kind_from_string(const std::string& name) {
  for (auto k : {PotentialKind::HomogeneousNBody, PotentialKind::OneCenter, PotentialKind::QuasiHomogeneous,
                 PotentialKind::LogarithmicNBody, PotentialKind::LogarithmicOneCenter,
                 PotentialKind::AnisotropicHomogeneous, PotentialKind::SubspaceDistance, PotentialKind::Custom}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown potential kind '" + name + "'");
}

PotentialSpec::PotentialSpec(MassMetric metric, PotentialKind kind, std::vector<Term> terms,
                             AssumptionConstants constants)
    : metric_(std::move(metric)), kind_(kind), terms_(std::move(terms)), constants_(constants) {
  if (terms_.empty()) throw Error(ErrorCode::InvalidArgument, "potential needs at least one term");
  bool has_power = false, has_log = false;
  for (const auto& t : terms_) {
    validate_term(t, metric_);
    if (is_power_term(t)) {
      has_power = true;
      alpha_ = std::max(alpha_, power_exponent(t));
    }
    has_log = has_log || is_log_term(t);
    time_dependent_ = time_dependent_ || std::visit(overloaded{
                                                        [&](const term::PairPower&) { return metric_.time_varying(); },
                                                        [&](const term::PairLog&) { return metric_.time_varying(); },
                                                        [](const term::CenterPower& p) { return !p.weight.is_constant(); },
                                                        [](const term::CenterLog& p) { return !p.weight.is_constant(); },
                                                        [](const term::Smooth& s) { return static_cast<bool>(s.fn.rate); },
                                                        [](const auto&) { return false; },
                                                    },
                                                    t);
  }
  logarithmic_ = !has_power && has_log;
  if (!(constants_.c1 >= 0.0) || !(constants_.c2 >= 0.0) || !(constants_.gamma > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "assumption constants need C1, C2 >= 0 and gamma > 0");
  }
  if (constants_.alpha_tilde && !(*constants_.alpha_tilde > 0.0 && *constants_.alpha_tilde < 2.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha_tilde must lie in (0, 2)");
  }
}

PotentialSpec PotentialSpec::homogeneous_n_body(MassMetric metric, double alpha) {
  return PotentialSpec(std::move(metric), PotentialKind::HomogeneousNBody, {term::PairPower{alpha}});
}

PotentialSpec PotentialSpec::one_center(int dim, double alpha, double weight) {
  return PotentialSpec(MassMetric::unit(1, dim), PotentialKind::OneCenter,
                       {term::CenterPower{alpha, PiecewiseCubic(weight)}});
}

PotentialSpec PotentialSpec::quasi_homogeneous(MassMetric metric, double alpha, double beta, double lambda) {
  if (!(beta > 0.0 && beta < alpha)) {
    throw Error(ErrorCode::InvalidArgument, "quasi-homogeneous potentials need 0 < beta < alpha");
  }
  std::vector<Term> terms;
  if (metric.bodies() == 1) {
    terms = {term::CenterPower{alpha}, term::CenterPower{beta, PiecewiseCubic(lambda)}};
  } else {
    terms = {term::PairPower{alpha}, term::PairPower{beta, lambda}};
  }
  AssumptionConstants constants;
  if (lambda >= 0.0) {
    constants.c2 = 0.0;
  } else {
    // for negative lambda the relaxed inequality holds near the origin with
    // C2 = alpha - beta and any 0 < gamma < alpha - beta
    constants.c2 = alpha - beta;
    constants.gamma = 0.5 * (alpha - beta);
  }
  return PotentialSpec(std::move(metric), PotentialKind::QuasiHomogeneous, std::move(terms), constants);
}

PotentialSpec PotentialSpec::logarithmic_n_body(MassMetric metric) {
  return PotentialSpec(std::move(metric), PotentialKind::LogarithmicNBody, {term::PairLog{}});
}

PotentialSpec PotentialSpec::logarithmic_one_center(int dim, PiecewiseCubic m_of_t) {
  return PotentialSpec(MassMetric::unit(1, dim), PotentialKind::LogarithmicOneCenter,
                       {term::CenterLog{std::move(m_of_t)}});
}

PotentialSpec PotentialSpec::anisotropic(MassMetric metric, double alpha, AngularProfile profile) {
  return PotentialSpec(std::move(metric), PotentialKind::AnisotropicHomogeneous,
                       {term::Anisotropic{alpha, std::move(profile)}});
}

PotentialSpec PotentialSpec::subspace_distance(MassMetric metric, double alpha,
                                               std::vector<std::pair<double, Subspace>> weighted_spaces) {
  if (weighted_spaces.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one subspace");
  std::vector<Term> terms;
  for (auto& [k, v] : weighted_spaces) {
    if (alpha == 0.0) {
      terms.emplace_back(term::SubspaceLog{std::move(v), k});
    } else {
      terms.emplace_back(term::SubspacePower{std::move(v), k, alpha});
    }
  }
  return PotentialSpec(std::move(metric), PotentialKind::SubspaceDistance, std::move(terms));
}

double PotentialSpec::hip_hop_constant(int n, double alpha) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "hip-hop needs N >= 2");
  double k = 0.0;
  for (int j = 1; j < n; ++j) k += std::pow(std::sin(j * std::numbers::pi / n), -alpha);
  return k;
}

PotentialSpec PotentialSpec::hip_hop_reduced(int n, double alpha) {
  MassMetric metric = MassMetric::unit(1, 3);
  Mat axis = Mat::Zero(3, 1);
  axis(2, 0) = 1.0;
  std::vector<Term> terms;
  terms.emplace_back(term::SubspacePower{Subspace::from_span(metric, axis), hip_hop_constant(n, alpha), alpha});
  for (int k = 1; k <= n; ++k) {
    const double s = std::sin((2.0 * k - 1.0) * std::numbers::pi / (2.0 * n));
    Mat a = Mat::Zero(3, 3);
    a(0, 0) = a(1, 1) = s * s;
    a(2, 2) = 1.0;
    terms.emplace_back(term::QuadraticPower{a, 1.0, alpha});
  }
  return PotentialSpec(std::move(metric), PotentialKind::Custom, std::move(terms));
}

PotentialSpec PotentialSpec::with_constants(AssumptionConstants constants) const {
  return PotentialSpec(metric_, kind_, terms_, constants);
}

PotentialSpec PotentialSpec::with_extra_terms(std::vector<Term> extra, PotentialKind kind) const {
  std::vector<Term> all = terms_;
  for (auto& t : extra) all.push_back(std::move(t));
  return PotentialSpec(metric_, kind, std::move(all), constants_);
}

double PotentialSpec::alpha_tilde() const noexcept {
  if (constants_.alpha_tilde) return *constants_.alpha_tilde;
  if (logarithmic_) return 1.0;
  return 0.5 * (alpha_ + 2.0);
}

double PotentialSpec::log_coefficient(double t) const {
  double m = 0.0;
  for (const auto& term : terms_) {
    std::visit(overloaded{
                   [&](const term::PairLog& p) {
                     for (auto [i, j] : expand_pairs(p.pairs, metric_.bodies())) {
                       m += p.weight * metric_.coupling(i, t) * metric_.coupling(j, t);
                     }
                   },
                   [&](const term::CenterLog& p) { m += p.weight(t); },
                   [&](const term::SubspaceLog& p) { m += p.weight; },
                   [](const auto&) {},
               },
               term);
  }
  return m;
}

double PotentialSpec::log_coefficient_rate(double t) const {
  double m = 0.0;
  for (const auto& term : terms_) {
    std::visit(overloaded{
                   [&](const term::PairLog& p) {
                     for (auto [i, j] : expand_pairs(p.pairs, metric_.bodies())) {
                       m += p.weight * (metric_.coupling_rate(i, t) * metric_.coupling(j, t) +
                                        metric_.coupling(i, t) * metric_.coupling_rate(j, t));
                     }
                   },
                   [&](const term::CenterLog& p) { m += p.weight.derivative(t); },
                   [](const auto&) {},
               },
               term);
  }
  return m;
}

double PotentialSpec::singular_distance(const Vec& x) const {
  TermEval ev{metric_, 0.0};
  double best = kInf;
  for (const auto& t : terms_) best = std::min(best, ev.distance(t, x));
  return best;
}

bool PotentialSpec::is_singular(const Vec& x) const {
  return singular_distance(x) <= kSingularityFloor * (1.0 + metric_.norm(x));
}

namespace {

void require_regular(const PotentialSpec& spec, const Vec& x) {
  if (x.size() != spec.metric().size()) {
    throw Error(ErrorCode::InvalidArgument, "configuration has the wrong length");
  }
  if (!x.allFinite()) throw Error(ErrorCode::InvalidArgument, "configuration is not finite");
  if (spec.is_singular(x)) {
    std::ostringstream os;
    os << "configuration within the singularity floor (distance " << spec.singular_distance(x) << ")";
    throw SingularConfiguration(os.str());
  }
}

}  // namespace

double PotentialSpec::evaluate(double t, const Vec& x) const {
  require_regular(*this, x);
  TermEval ev{metric_, t};
  double u = 0.0;
  for (const auto& term : terms_) u += ev.value(term, x);
  return u;
}

Vec PotentialSpec::gradient(double t, const Vec& x) const {
  require_regular(*this, x);
  TermEval ev{metric_, t};
  Vec g = Vec::Zero(x.size());
  for (const auto& term : terms_) g += ev.gradient(term, x);
  return g;
}

double PotentialSpec::partial_t(double t, const Vec& x, bool check_c1) const {
  require_regular(*this, x);
  if (!time_dependent_) return 0.0;
  TermEval ev{metric_, t};
  double rate = 0.0;
  for (const auto& term : terms_) rate += ev.rate(term, x);
  if (check_c1) {
    const double u = evaluate(t, x);
    if (std::abs(rate) > constants_.c1 * (std::max(u, 0.0) + 1.0) * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "(U1) violated: |dU/dt| = " << std::abs(rate) << " > C1 (U + 1) = " << constants_.c1 * (u + 1.0);
      throw Error(ErrorCode::AssumptionViolation, os.str());
    }
  }
  return rate;
}

Vec PotentialSpec::nearest_singular_point(const Vec& x) const {
  TermEval ev{metric_, 0.0};
  double best = kInf;
  Vec point = Vec::Zero(x.size());
  auto consider_pairs = [&](const term::PairList& pairs) {
    for (auto [i, j] : expand_pairs(pairs, metric_.bodies())) {
      const double d = (metric_.body(x, i) - metric_.body(x, j)).norm() * reduced_mass_factor(metric_, i, j);
      if (d < best) {
        best = d;
        point = x;
        const double mi = metric_.mass(i), mj = metric_.mass(j);
        const Vec c = (mi * metric_.body(x, i) + mj * metric_.body(x, j)) / (mi + mj);
        metric_.body(point, i) = c;
        metric_.body(point, j) = c;
      }
    }
  };
  for (const auto& term : terms_) {
    std::visit(overloaded{
                   [&](const term::PairPower& p) { consider_pairs(p.pairs); },
                   [&](const term::PairLog& p) { consider_pairs(p.pairs); },
                   [&](const term::SubspacePower& p) {
                     const double d = p.space.distance(x);
                     if (d < best) { best = d; point = p.space.project(x); }
                   },
                   [&](const term::SubspaceLog& p) {
                     const double d = p.space.distance(x);
                     if (d < best) { best = d; point = p.space.project(x); }
                   },
                   [&](const term::Smooth&) {},
                   [&](const auto& other) {
                     const double d = ev.distance(Term(other), x);
                     if (d < best) { best = d; point = Vec::Zero(x.size()); }
                   },
               },
               term);
  }
  return point;
}

std::vector<Subspace> PotentialSpec::singular_subspaces() const {
  std::vector<Subspace> out;
  auto add = [&](Subspace v) {
    for (const auto& existing : out) {
      if (existing.same_as(v)) return;
    }
    out.push_back(std::move(v));
  };
  for (const auto& term : terms_) {
    std::visit(overloaded{
                   [&](const term::PairPower& p) {
                     for (auto [i, j] : expand_pairs(p.pairs, metric_.bodies())) add(Subspace::coincidence(metric_, i, j));
                   },
                   [&](const term::PairLog& p) {
                     for (auto [i, j] : expand_pairs(p.pairs, metric_.bodies())) add(Subspace::coincidence(metric_, i, j));
                   },
                   [&](const term::SubspacePower& p) { add(p.space); },
                   [&](const term::SubspaceLog& p) { add(p.space); },
                   [&](const term::Smooth&) {},
                   [&](const auto&) { add(Subspace::zero(metric_)); },
               },
               term);
  }
  // drop members contained in another member: Delta is the union of the maximal ones
  std::vector<Subspace> maximal;
  for (std::size_t a = 0; a < out.size(); ++a) {
    bool contained = false;
    for (std::size_t b = 0; b < out.size() && !contained; ++b) {
      contained = a != b && out[b].dim() > out[a].dim() && out[b].contains(out[a]);
    }
    if (!contained) maximal.push_back(out[a]);
  }
  return maximal;
}

namespace {

std::vector<Term> leading_terms(const std::vector<Term>& terms, bool logarithmic, double alpha) {
  std::vector<Term> lead;
  for (const auto& t : terms) {
    if (logarithmic ? is_log_term(t) : (is_power_term(t) && power_exponent(t) == alpha)) lead.push_back(t);
  }
  return lead;
}

}  // namespace

double PotentialSpec::limit_potential(double t, const Vec& s) const {
  const double r = metric_.norm(s);
  if (std::abs(r - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "limit potential expects a unit configuration");
  }
  if (is_singular(s)) throw Error(ErrorCode::SingularDirection, "direction lies on the collision set");
  TermEval ev{metric_, t};
  double u = 0.0;
  for (const auto& term : leading_terms(terms_, logarithmic_, alpha_)) u += ev.value(term, s);
  return u;
}

Vec PotentialSpec::limit_tangential_gradient(double t, const Vec& s) const {
  if (is_singular(s)) throw Error(ErrorCode::SingularDirection, "direction lies on the collision set");
  TermEval ev{metric_, t};
  Vec g = Vec::Zero(s.size());
  for (const auto& term : leading_terms(terms_, logarithmic_, alpha_)) g += ev.gradient(term, s);
  const double n2 = metric_.norm2(s);
  return g - metric_.dot(g, s) / n2 * s;
}

PotentialSpec PotentialSpec::limit_spec() const {
  auto lead = leading_terms(terms_, logarithmic_, alpha_);
  if (lead.empty()) throw Error(ErrorCode::InvalidArgument, "potential has no singular leading part");
  const bool same = lead.size() == terms_.size();
  return PotentialSpec(metric_, same ? kind_ : PotentialKind::Custom, std::move(lead), constants_);
}

namespace {

// Terms singular at xi (keep_singular) or the remaining ones; pair terms are
// split pair by pair.
std::vector<Term> split_terms_at(const std::vector<Term>& terms, const MassMetric& metric, const Vec& xi, double tol,
                                 bool keep_singular) {
  std::vector<Term> kept;
  auto pick_pairs = [&](const term::PairList& pairs) {
    term::PairList out;
    for (auto [i, j] : expand_pairs(pairs, metric.bodies())) {
      const bool close = (metric.body(xi, i) - metric.body(xi, j)).norm() * reduced_mass_factor(metric, i, j) <= tol;
      if (close == keep_singular) out.emplace_back(i, j);
    }
    return out;
  };
  for (const auto& term : terms) {
    std::visit(overloaded{
                   [&](const term::PairPower& p) {
                     auto pairs = pick_pairs(p.pairs);
                     if (!pairs.empty()) kept.emplace_back(term::PairPower{p.exponent, p.weight, std::move(pairs)});
                   },
                   [&](const term::PairLog& p) {
                     auto pairs = pick_pairs(p.pairs);
                     if (!pairs.empty()) kept.emplace_back(term::PairLog{p.weight, std::move(pairs)});
                   },
                   [&](const term::SubspacePower& p) {
                     if ((p.space.distance(xi) <= tol) == keep_singular) kept.emplace_back(p);
                   },
                   [&](const term::SubspaceLog& p) {
                     if ((p.space.distance(xi) <= tol) == keep_singular) kept.emplace_back(p);
                   },
                   [&](const term::Smooth& p) {
                     if (!keep_singular) kept.emplace_back(p);
                   },
                   [&](const auto& other) {
                     if ((metric.norm(xi) <= tol) == keep_singular) kept.emplace_back(other);
                   },
               },
               term);
  }
  return kept;
}

}  // namespace

PotentialSpec PotentialSpec::singular_part_at(const Vec& xi, double tol) const {
  std::vector<Term> kept = split_terms_at(terms_, metric_, xi, tol, true);
  if (kept.empty()) throw Error(ErrorCode::NotOnDelta, "no singular term vanishes at the given point");
  return PotentialSpec(metric_, PotentialKind::Custom, std::move(kept), constants_);
}

std::vector<Term> PotentialSpec::regular_terms_at(const Vec& xi, double tol) const {
  return split_terms_at(terms_, metric_, xi, tol, false);
}

}  // namespace singlab
