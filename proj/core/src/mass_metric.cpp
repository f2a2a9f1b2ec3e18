#include "singlab/mass_metric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "singlab/error.hpp"

namespace singlab {

namespace {

// Sample the mass function densely over its knot span (padded by one unit on each
// side, since pieces extrapolate) and reject non-positive values.
void check_positive(const PiecewiseCubic& m, int body) {
  const auto& knots = m.knots();
  const double lo = knots.front() - 1.0;
  const double hi = knots.back() + 1.0;
  constexpr int samples = 512;
  for (int k = 0; k <= samples; ++k) {
    const double t = lo + (hi - lo) * k / samples;
    const double v = m(t);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument,
                  "mass function of body " + std::to_string(body) + " is not positive at t=" +
                      std::to_string(t));
    }
  }
}

}  // namespace

MassMetric::MassMetric(std::vector<double> masses, int dim, std::vector<PiecewiseCubic> mass_functions)
    : masses_(std::move(masses)), dim_(dim), mass_functions_(std::move(mass_functions)) {
  if (masses_.empty()) throw Error(ErrorCode::InvalidArgument, "mass metric needs at least one body");
  if (dim_ < 1) throw Error(ErrorCode::InvalidArgument, "ambient dimension must be >= 1");
  for (double m : masses_) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw Error(ErrorCode::InvalidArgument, "masses must be strictly positive and finite");
    }
  }
  if (!mass_functions_.empty()) {
    if (mass_functions_.size() != masses_.size()) {
      throw Error(ErrorCode::InvalidArgument, "one mass function per body required");
    }
    for (std::size_t i = 0; i < mass_functions_.size(); ++i) check_positive(mass_functions_[i], static_cast<int>(i));
  }
  weights_.resize(size());
  for (int i = 0; i < bodies(); ++i) weights_.segment(i * dim_, dim_).setConstant(masses_[static_cast<std::size_t>(i)]);
  sqrt_weights_ = weights_.array().sqrt().matrix();
}

double MassMetric::norm(const Vec& a) const { return std::sqrt(norm2(a)); }

double MassMetric::coupling(int i, double t) const {
  if (mass_functions_.empty()) return masses_[static_cast<std::size_t>(i)];
  return mass_functions_[static_cast<std::size_t>(i)](t);
}

double MassMetric::coupling_rate(int i, double t) const {
  if (mass_functions_.empty()) return 0.0;
  return mass_functions_[static_cast<std::size_t>(i)].derivative(t);
}

Vec MassMetric::centre_of_mass(const Vec& x) const {
  Vec c = Vec::Zero(dim_);
  double total = 0.0;
  for (int i = 0; i < bodies(); ++i) {
    c += mass(i) * body(x, i);
    total += mass(i);
  }
  return c / total;
}

}  // namespace singlab
