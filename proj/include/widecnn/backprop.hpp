#pragma once

#include <optional>
#include <vector>

#include "widecnn/network.hpp"

namespace widecnn {

/// 0.5 * ||F_L - Y||_F^2
double loss(const ForwardTrace& trace, const Matrix& Y);
double loss(const Matrix& output, const Matrix& Y);

struct LayerGradient {
  Matrix grad_W;                  // l_{l-1} x T_l
  Vector grad_b;                  // n_l
  std::optional<Matrix> grad_U;   // n_{l-1} x n_l, only when requested
  std::optional<Matrix> delta;    // N x n_l, only with keep_deltas
};

/// Gradients of the squared loss for layers start_layer..L.
struct GradientSet {
  std::size_t start_layer = 1;
  std::vector<LayerGradient> layers;

  const LayerGradient& at(std::size_t l) const { return layers.at(l - start_layer); }
  LayerGradient& at(std::size_t l) { return layers.at(l - start_layer); }
  std::size_t end_layer() const { return start_layer + layers.size() - 1; }
};

struct BackwardOptions {
  std::size_t start_layer = 1;
  /// Materialize grad_U = F_{l-1}^T Delta_l for these layers (all layers when
  /// lift_all is set). Dense U-gradients of wide conv layers are large, so
  /// they are opt-in.
  std::vector<std::size_t> lifted_layers;
  bool lift_all = false;
  bool keep_deltas = false;
};

/// Matrix-form backpropagation: Delta_L = F_L - Y,
/// Delta_l = (Delta_{l+1} U_{l+1}^T) o s_l'(G_l), grad_U_l = F_{l-1}^T Delta_l,
/// grad_W_l = lift_adjoint(grad_U_l), grad_b_l = 1^T Delta_l.
/// Max-pool layers at or above start_layer are rejected (UnsupportedLayer).
GradientSet backward(const NetworkSpec& spec, const Params& params, const ForwardTrace& trace, const Matrix& Y,
                     const BackwardOptions& options = {});

/// Central differences (Phi(w+h) - Phi(w-h)) / 2h on every W and b entry of
/// every parameterized layer.
GradientSet finite_difference_gradient(const NetworkSpec& spec, const Params& params, const Matrix& X,
                                       const Matrix& Y, double step);

/// Largest |a - b| / max(|a|, |b|, 1e-3 * g) over all W and b entries both
/// sets hold, where g is the largest entry magnitude of b.
double max_relative_error(const GradientSet& a, const GradientSet& b);

}  // namespace widecnn
