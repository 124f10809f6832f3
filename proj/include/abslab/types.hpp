#pragma once

#include <Eigen/Core>

namespace abslab {

// Batch-major matrices: one row per sample.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

}  // namespace abslab
