#pragma once

#include <Eigen/Dense>

namespace singlab {

/// A configuration in R^{n d}: body-major, so body i occupies [i*d, (i+1)*d).
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

}  // namespace singlab
