#pragma once

#include <Eigen/Dense>

namespace widecnn {

// Feature matrices keep one sample per row; row-major storage lets a
// (N*P) x T patch product be reinterpreted in place as the N x (P*T) layer
// output, which is exactly the h = p*T + t unit ordering.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace widecnn
