#pragma once

#include "widecnn/network.hpp"

namespace widecnn {

/// The full weight matrix U = M(W) (n_{k-1} x n_k) of a convolutional or fully
/// connected layer: column h = p*T + t holds filter t at the indices of patch p.
Matrix lift_weights(const LayerSpec& layer, const Matrix& W);
Matrix lift_weights(const NetworkSpec& spec, std::size_t k, const Matrix& W);

/// Adjoint of the lifting map: sums V over every (patch, filter) placement,
/// so that <M(W), V>_F = <W, lift_adjoint(V)>_F.
Matrix lift_adjoint(const LayerSpec& layer, const Matrix& V);
Matrix lift_adjoint(const NetworkSpec& spec, std::size_t k, const Matrix& V);

}  // namespace widecnn
