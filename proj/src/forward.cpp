#include "widecnn/forward.hpp"

#include <sstream>

#include "widecnn/error.hpp"

namespace widecnn {

namespace patch_ops {

Matrix gather(const Matrix& F, const PatchLayout& layout) {
  const Eigen::Index N = F.rows();
  const std::size_t P = layout.patch_count();
  const std::size_t l = layout.patch_size();
  const auto& idx = layout.flat();
  Matrix cols(N * static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(l));
  for (Eigen::Index i = 0; i < N; ++i) {
    const double* src = F.row(i).data();
    double* dst = cols.row(i * static_cast<Eigen::Index>(P)).data();
    for (std::size_t j = 0; j < P * l; ++j) dst[j] = src[idx[j]];
  }
  return cols;
}

void scatter_add(const Matrix& cols, const PatchLayout& layout, Matrix& F) {
  const Eigen::Index N = F.rows();
  const std::size_t P = layout.patch_count();
  const std::size_t l = layout.patch_size();
  const auto& idx = layout.flat();
  for (Eigen::Index i = 0; i < N; ++i) {
    const double* src = cols.row(i * static_cast<Eigen::Index>(P)).data();
    double* dst = F.row(i).data();
    for (std::size_t j = 0; j < P * l; ++j) dst[idx[j]] += src[j];
  }
}

Matrix preactivation(const LayerSpec& layer, const LayerParams& lp, const Matrix& F_prev) {
  const Eigen::Index N = F_prev.rows();
  Matrix G;
  if (layer.layout().is_identity_patch()) {
    G.noalias() = F_prev * lp.W;
  } else {
    const Matrix cols = gather(F_prev, layer.layout());
    Matrix R(cols.rows(), lp.W.cols());
    R.noalias() = cols * lp.W;
    // (N*P) x T row-major is bit-identical to N x (P*T) row-major.
    G = Eigen::Map<const Matrix>(R.data(), N, static_cast<Eigen::Index>(layer.width()));
  }
  G.rowwise() += lp.b.transpose();
  return G;
}

Matrix max_pool(const PatchLayout& layout, const Matrix& F_prev) {
  const Eigen::Index N = F_prev.rows();
  const std::size_t P = layout.patch_count();
  Matrix out(N, static_cast<Eigen::Index>(P));
  for (Eigen::Index i = 0; i < N; ++i) {
    for (std::size_t p = 0; p < P; ++p) {
      const auto patch = layout.patch(p);
      double best = F_prev(i, static_cast<Eigen::Index>(patch[0]));
      for (std::size_t r = 1; r < patch.size(); ++r) best = std::max(best, F_prev(i, static_cast<Eigen::Index>(patch[r])));
      out(i, static_cast<Eigen::Index>(p)) = best;
    }
  }
  return out;
}

Matrix apply(const Activation& activation, const Matrix& G) {
  if (activation.kind() == ActivationKind::Identity) return G;
  return G.unaryExpr([&](double t) { return activation(t); });
}

Matrix apply_derivative(const Activation& activation, const Matrix& G) {
  return G.unaryExpr([&](double t) { return activation.derivative(t); });
}

}  // namespace patch_ops

ForwardTrace forward(const NetworkSpec& spec, const Params& params, const Matrix& X,
                     std::size_t up_to_layer) {
  const std::size_t last = up_to_layer == 0 ? spec.depth() : up_to_layer;
  if (last > spec.depth()) throw Error(ErrorKind::Structural, "forward past the output layer");
  if (static_cast<std::size_t>(X.cols()) != spec.input_width()) {
    std::ostringstream os;
    os << "input has " << X.cols() << " columns, network expects " << spec.input_width();
    throw Error(ErrorKind::Structural, os.str());
  }
  if (!X.allFinite()) throw Error(ErrorKind::NumericOverflow, "input contains non-finite values");
  params.check(spec, last);

  ForwardTrace trace;
  trace.F.resize(last + 1);
  trace.G.resize(last + 1);
  trace.F[0] = X;
  for (std::size_t k = 1; k <= last; ++k) {
    const LayerSpec& layer = spec.layer(k);
    if (layer.kind() == LayerKind::MaxPool) {
      trace.F[k] = patch_ops::max_pool(layer.layout(), trace.F[k - 1]);
    } else {
      trace.G[k] = patch_ops::preactivation(layer, params.at(k), trace.F[k - 1]);
      trace.F[k] = patch_ops::apply(layer.activation(), trace.G[k]);
    }
    if (!trace.F[k].allFinite() || (trace.G[k].size() > 0 && !trace.G[k].allFinite())) {
      throw Error(ErrorKind::NumericOverflow, "non-finite value in layer " + std::to_string(k));
    }
  }
  return trace;
}

}  // namespace widecnn
