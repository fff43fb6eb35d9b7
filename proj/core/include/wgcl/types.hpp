#pragma once

#include <Eigen/Core>

namespace wgcl {

// Views are d x |N| with one column per node: users [0, |U|), then items.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

}  // namespace wgcl
