#include "widecnn/backprop.hpp"

#include <algorithm>
#include <cmath>

#include "widecnn/error.hpp"
#include "widecnn/forward.hpp"

namespace widecnn {

double loss(const Matrix& output, const Matrix& Y) {
  if (output.rows() != Y.rows() || output.cols() != Y.cols()) {
    throw Error(ErrorKind::Structural, "network output and targets differ in shape");
  }
  return 0.5 * (output - Y).squaredNorm();
}

double loss(const ForwardTrace& trace, const Matrix& Y) { return loss(trace.output(), Y); }

namespace {

// Delta_l U_l^T without forming U_l: each (patch, filter) block of Delta
// pushes back through the shared filter onto the patch positions.
Matrix pull_back(const LayerSpec& layer, const Matrix& W, const Matrix& delta) {
  const Eigen::Index N = delta.rows();
  if (layer.layout().is_identity_patch()) return delta * W.transpose();
  const auto P = static_cast<Eigen::Index>(layer.layout().patch_count());
  const Eigen::Map<const Matrix> blocks(delta.data(), N * P, W.cols());
  const Matrix cols = blocks * W.transpose();
  Matrix out = Matrix::Zero(N, static_cast<Eigen::Index>(layer.in_width()));
  patch_ops::scatter_add(cols, layer.layout(), out);
  return out;
}

Matrix filter_gradient(const LayerSpec& layer, const Matrix& F_prev, const Matrix& delta) {
  if (layer.layout().is_identity_patch()) return F_prev.transpose() * delta;
  const Eigen::Index N = delta.rows();
  const auto P = static_cast<Eigen::Index>(layer.layout().patch_count());
  const auto T = static_cast<Eigen::Index>(layer.filter_count());
  const Matrix cols = patch_ops::gather(F_prev, layer.layout());
  const Eigen::Map<const Matrix> blocks(delta.data(), N * P, T);
  return cols.transpose() * blocks;
}

}  // namespace

GradientSet backward(const NetworkSpec& spec, const Params& params, const ForwardTrace& trace, const Matrix& Y,
                     const BackwardOptions& options) {
  const std::size_t L = spec.depth();
  const std::size_t start = options.start_layer;
  if (start == 0 || start > L) throw Error(ErrorKind::Structural, "backward start layer out of range");
  if (trace.F.size() != L + 1) throw Error(ErrorKind::Structural, "trace does not cover the whole network");
  for (std::size_t l = start; l <= L; ++l) {
    if (spec.layer(l).kind() == LayerKind::MaxPool) {
      throw Error(ErrorKind::UnsupportedLayer,
                  "max-pool layer " + std::to_string(l) + " inside the differentiated segment");
    }
  }
  params.check(spec);
  const Matrix& out = trace.output();
  if (out.rows() != Y.rows() || out.cols() != Y.cols()) {
    throw Error(ErrorKind::Structural, "network output and targets differ in shape");
  }

  auto lifted = [&](std::size_t l) {
    return options.lift_all ||
           std::find(options.lifted_layers.begin(), options.lifted_layers.end(), l) != options.lifted_layers.end();
  };

  GradientSet grads;
  grads.start_layer = start;
  grads.layers.resize(L - start + 1);

  Matrix delta = out - Y;
  for (std::size_t l = L;; --l) {
    const LayerSpec& layer = spec.layer(l);
    const Matrix& F_prev = trace.F[l - 1];
    LayerGradient& g = grads.at(l);
    g.grad_W = filter_gradient(layer, F_prev, delta);
    g.grad_b = delta.colwise().sum().transpose();
    if (lifted(l)) g.grad_U = F_prev.transpose() * delta;
    if (l == start) {
      if (options.keep_deltas) g.delta = std::move(delta);
      break;
    }
    Matrix next = pull_back(layer, params.at(l).W, delta);
    const LayerSpec& below = spec.layer(l - 1);
    next.array() *= patch_ops::apply_derivative(below.activation(), trace.G[l - 1]).array();
    if (options.keep_deltas) g.delta = std::move(delta);
    delta = std::move(next);
  }
  return grads;
}

GradientSet finite_difference_gradient(const NetworkSpec& spec, const Params& params, const Matrix& X,
                                       const Matrix& Y, double step) {
  if (!(step > 0.0)) throw Error(ErrorKind::Precondition, "finite-difference step must be positive");
  params.check(spec);
  const std::size_t L = spec.depth();
  GradientSet grads;
  grads.start_layer = 1;
  grads.layers.resize(L);
  Params probe = params;
  auto objective = [&] { return loss(forward(spec, probe, X), Y); };
  auto central = [&](double& coordinate) {
    const double saved = coordinate;
    coordinate = saved + step;
    const double up = objective();
    coordinate = saved - step;
    const double down = objective();
    coordinate = saved;
    return (up - down) / (2.0 * step);
  };
  for (std::size_t l = 1; l <= L; ++l) {
    if (!spec.layer(l).has_params()) continue;
    LayerParams& lp = probe.at(l);
    LayerGradient& g = grads.at(l);
    g.grad_W.resize(lp.W.rows(), lp.W.cols());
    for (Eigen::Index i = 0; i < lp.W.size(); ++i) g.grad_W.data()[i] = central(lp.W.data()[i]);
    g.grad_b.resize(lp.b.size());
    for (Eigen::Index i = 0; i < lp.b.size(); ++i) g.grad_b[i] = central(lp.b[i]);
  }
  return grads;
}

double max_relative_error(const GradientSet& a, const GradientSet& b) {
  const std::size_t first = std::max(a.start_layer, b.start_layer);
  const std::size_t last = std::min(a.end_layer(), b.end_layer());
  double scale = 0.0;
  for (std::size_t l = first; l <= last; ++l) {
    scale = std::max({scale, b.at(l).grad_W.cwiseAbs().maxCoeff(), b.at(l).grad_b.cwiseAbs().maxCoeff()});
  }
  // Entries far below the gradient's own scale are compared against that
  // scale rather than against themselves.
  const double floor = std::max(1e-3 * scale, 1e-12);
  double worst = 0.0;
  auto compare = [&](const double* x, const double* y, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double denom = std::max({std::abs(x[i]), std::abs(y[i]), floor});
      worst = std::max(worst, std::abs(x[i] - y[i]) / denom);
    }
  };
  for (std::size_t l = first; l <= last; ++l) {
    const LayerGradient& ga = a.at(l);
    const LayerGradient& gb = b.at(l);
    if (ga.grad_W.size() == 0 && gb.grad_W.size() == 0) continue;
    if (ga.grad_W.rows() != gb.grad_W.rows() || ga.grad_W.cols() != gb.grad_W.cols() ||
        ga.grad_b.size() != gb.grad_b.size()) {
      throw Error(ErrorKind::Structural, "gradient sets disagree in shape at layer " + std::to_string(l));
    }
    compare(ga.grad_W.data(), gb.grad_W.data(), ga.grad_W.size());
    compare(ga.grad_b.data(), gb.grad_b.data(), ga.grad_b.size());
  }
  return worst;
}

}  // namespace widecnn
