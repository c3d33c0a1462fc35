#pragma once

#include "widecnn/network.hpp"

namespace widecnn {

/// Evaluates layers 1..up_to_layer (all layers when 0) on the rows of X.
/// Throws Structural on shape mismatches and NumericOverflow (naming the
/// layer) when a non-finite value appears.
ForwardTrace forward(const NetworkSpec& spec, const Params& params, const Matrix& X,
                     std::size_t up_to_layer = 0);

namespace patch_ops {

/// Gathers every patch of every sample: row i*P + p holds F(i, patch p).
Matrix gather(const Matrix& F, const PatchLayout& layout);

/// Adds row i*P + p of `cols` back onto F(i, patch p); inverse access pattern
/// of gather.
void scatter_add(const Matrix& cols, const PatchLayout& layout, Matrix& F);

/// Pre-activation F_prev U + 1 b^T of a conv/FC layer, computed patchwise.
Matrix preactivation(const LayerSpec& layer, const LayerParams& params, const Matrix& F_prev);

Matrix max_pool(const PatchLayout& layout, const Matrix& F_prev);

Matrix apply(const Activation& activation, const Matrix& G);
Matrix apply_derivative(const Activation& activation, const Matrix& G);

}  // namespace patch_ops

}  // namespace widecnn
