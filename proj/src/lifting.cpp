#include "widecnn/lifting.hpp"

#include <sstream>

#include "widecnn/error.hpp"

namespace widecnn {

namespace {

void require_weighted(const LayerSpec& layer) {
  if (!layer.has_params()) throw Error(ErrorKind::UnsupportedLayer, "max-pool layers have no weight matrix");
}

}  // namespace

Matrix lift_weights(const LayerSpec& layer, const Matrix& W) {
  require_weighted(layer);
  const std::size_t l = layer.filter_length();
  const std::size_t T = layer.filter_count();
  if (static_cast<std::size_t>(W.rows()) != l || static_cast<std::size_t>(W.cols()) != T) {
    std::ostringstream os;
    os << "filter matrix is " << W.rows() << "x" << W.cols() << ", layer expects " << l << "x" << T;
    throw Error(ErrorKind::Structural, os.str());
  }
  const PatchLayout& layout = layer.layout();
  Matrix U = Matrix::Zero(static_cast<Eigen::Index>(layer.in_width()),
                          static_cast<Eigen::Index>(layer.width()));
  for (std::size_t p = 0; p < layout.patch_count(); ++p) {
    const auto patch = layout.patch(p);
    for (std::size_t t = 0; t < T; ++t) {
      const auto h = static_cast<Eigen::Index>(p * T + t);
      for (std::size_t r = 0; r < l; ++r) {
        U(static_cast<Eigen::Index>(patch[r]), h) = W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t));
      }
    }
  }
  return U;
}

Matrix lift_weights(const NetworkSpec& spec, std::size_t k, const Matrix& W) {
  return lift_weights(spec.layer(k), W);
}

Matrix lift_adjoint(const LayerSpec& layer, const Matrix& V) {
  require_weighted(layer);
  if (static_cast<std::size_t>(V.rows()) != layer.in_width() ||
      static_cast<std::size_t>(V.cols()) != layer.width()) {
    throw Error(ErrorKind::Structural, "adjoint argument does not have the shape of U");
  }
  const std::size_t l = layer.filter_length();
  const std::size_t T = layer.filter_count();
  const PatchLayout& layout = layer.layout();
  Matrix W = Matrix::Zero(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(T));
  for (std::size_t p = 0; p < layout.patch_count(); ++p) {
    const auto patch = layout.patch(p);
    for (std::size_t t = 0; t < T; ++t) {
      const auto h = static_cast<Eigen::Index>(p * T + t);
      for (std::size_t r = 0; r < l; ++r) {
        W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) += V(static_cast<Eigen::Index>(patch[r]), h);
      }
    }
  }
  return W;
}

Matrix lift_adjoint(const NetworkSpec& spec, std::size_t k, const Matrix& V) {
  return lift_adjoint(spec.layer(k), V);
}

}  // namespace widecnn
