#pragma once

#include <Eigen/Dense>

namespace brainalign {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace brainalign
