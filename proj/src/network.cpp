#include "widecnn/network.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "widecnn/error.hpp"

namespace widecnn {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Convolutional: return "conv";
    case LayerKind::FullyConnected: return "fc";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Output: return "output";
  }
  return "output";
}

LayerSpec LayerSpec::convolutional(PatchLayout layout, std::size_t filters, Activation activation) {
  if (filters == 0) throw Error(ErrorKind::Structural, "convolutional layer needs at least one filter");
  if (layout.patch_count() == 0) throw Error(ErrorKind::Structural, "convolutional layer without patches");
  LayerSpec s;
  s.kind_ = LayerKind::Convolutional;
  s.layout_ = std::move(layout);
  s.filters_ = filters;
  s.activation_ = activation;
  return s;
}

LayerSpec LayerSpec::fully_connected(std::size_t in_width, std::size_t out_width, Activation activation) {
  if (out_width == 0) throw Error(ErrorKind::Structural, "fully connected layer needs a positive width");
  LayerSpec s;
  s.kind_ = LayerKind::FullyConnected;
  s.layout_ = PatchLayout::full(in_width);
  s.filters_ = out_width;
  s.activation_ = activation;
  return s;
}

LayerSpec LayerSpec::max_pool(PatchLayout layout) {
  if (layout.patch_count() == 0) throw Error(ErrorKind::Structural, "max-pool layer without patches");
  LayerSpec s;
  s.kind_ = LayerKind::MaxPool;
  s.layout_ = std::move(layout);
  s.filters_ = 0;
  s.activation_ = Activation::identity();
  return s;
}

LayerSpec LayerSpec::output(std::size_t in_width, std::size_t out_width) {
  if (out_width == 0) throw Error(ErrorKind::Structural, "output layer needs a positive width");
  LayerSpec s;
  s.kind_ = LayerKind::Output;
  s.layout_ = PatchLayout::full(in_width);
  s.filters_ = out_width;
  s.activation_ = Activation::identity();
  return s;
}

std::size_t LayerSpec::width() const {
  if (kind_ == LayerKind::MaxPool) return layout_.patch_count();
  return filters_ * layout_.patch_count();
}

NetworkSpec::NetworkSpec(std::size_t input_width, std::vector<LayerSpec> layers)
    : input_width_(input_width), layers_(std::move(layers)) {
  if (input_width_ == 0) throw Error(ErrorKind::Structural, "input width must be positive");
  if (layers_.empty()) throw Error(ErrorKind::Structural, "network has no layers");
  std::size_t prev = input_width_;
  for (std::size_t k = 1; k <= layers_.size(); ++k) {
    const LayerSpec& layer = layers_[k - 1];
    if (layer.in_width() != prev) {
      std::ostringstream os;
      os << "layer " << k << " expects " << layer.in_width() << " inputs but layer " << k - 1
         << " has width " << prev;
      throw Error(ErrorKind::Structural, os.str());
    }
    const bool last = k == layers_.size();
    if (last != (layer.kind() == LayerKind::Output)) {
      throw Error(ErrorKind::Structural, last ? "last layer must be the fully connected output layer"
                                              : "output layer may only appear last");
    }
    prev = layer.width();
  }
}

const LayerSpec& NetworkSpec::layer(std::size_t k) const {
  if (k == 0 || k > layers_.size()) {
    throw Error(ErrorKind::Structural, "layer index " + std::to_string(k) + " out of range");
  }
  return layers_[k - 1];
}

std::size_t NetworkSpec::width(std::size_t k) const {
  if (k == 0) return input_width_;
  return layer(k).width();
}

std::vector<std::size_t> NetworkSpec::widths() const {
  std::vector<std::size_t> out;
  out.reserve(depth() + 1);
  for (std::size_t k = 0; k <= depth(); ++k) out.push_back(width(k));
  return out;
}

NetworkSpec NetworkSpec::tail(std::size_t from) const {
  if (from >= depth()) throw Error(ErrorKind::Structural, "tail would contain no layers");
  std::vector<LayerSpec> rest(layers_.begin() + static_cast<std::ptrdiff_t>(from), layers_.end());
  return NetworkSpec(width(from), std::move(rest));
}

std::vector<LayerSpec> NetworkSpec::head(std::size_t k) const {
  if (k > depth()) throw Error(ErrorKind::Structural, "head longer than the network");
  return {layers_.begin(), layers_.begin() + static_cast<std::ptrdiff_t>(k)};
}

Params Params::zeros(const NetworkSpec& spec) {
  Params params;
  params.layers.resize(spec.depth());
  for (std::size_t k = 1; k <= spec.depth(); ++k) {
    const LayerSpec& layer = spec.layer(k);
    if (!layer.has_params()) continue;
    params.at(k).W = Matrix::Zero(static_cast<Eigen::Index>(layer.filter_length()),
                                  static_cast<Eigen::Index>(layer.filter_count()));
    params.at(k).b = Vector::Zero(static_cast<Eigen::Index>(layer.width()));
  }
  return params;
}

Params Params::gaussian(const NetworkSpec& spec, std::uint64_t seed, double scale, bool fan_in_scaling,
                        std::size_t up_to_layer) {
  const std::size_t last = up_to_layer == 0 ? spec.depth() : up_to_layer;
  Params params;
  params.layers.resize(spec.depth());
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t k = 1; k <= last; ++k) {
    const LayerSpec& layer = spec.layer(k);
    if (!layer.has_params()) continue;
    const double s =
        fan_in_scaling ? scale / std::sqrt(static_cast<double>(layer.filter_length())) : scale;
    LayerParams& lp = params.at(k);
    lp.W.resize(static_cast<Eigen::Index>(layer.filter_length()),
                static_cast<Eigen::Index>(layer.filter_count()));
    for (Eigen::Index i = 0; i < lp.W.size(); ++i) lp.W.data()[i] = s * normal(rng);
    lp.b.resize(static_cast<Eigen::Index>(layer.width()));
    for (Eigen::Index i = 0; i < lp.b.size(); ++i) lp.b[i] = s * normal(rng);
  }
  return params;
}

void Params::check(const NetworkSpec& spec, std::size_t up_to_layer) const {
  const std::size_t last = up_to_layer == 0 ? spec.depth() : up_to_layer;
  if (layers.size() != spec.depth()) {
    throw Error(ErrorKind::Structural, "parameter set has " + std::to_string(layers.size()) +
                                           " layers, network has " + std::to_string(spec.depth()));
  }
  for (std::size_t k = 1; k <= last; ++k) {
    const LayerSpec& layer = spec.layer(k);
    const LayerParams& lp = at(k);
    if (!layer.has_params()) {
      if (!lp.empty()) throw Error(ErrorKind::Structural, "max-pool layer " + std::to_string(k) + " carries parameters");
      continue;
    }
    if (static_cast<std::size_t>(lp.W.rows()) != layer.filter_length() ||
        static_cast<std::size_t>(lp.W.cols()) != layer.filter_count() ||
        static_cast<std::size_t>(lp.b.size()) != layer.width()) {
      std::ostringstream os;
      os << "layer " << k << " expects W " << layer.filter_length() << "x" << layer.filter_count()
         << " and b of length " << layer.width() << ", got W " << lp.W.rows() << "x" << lp.W.cols()
         << " and b of length " << lp.b.size();
      throw Error(ErrorKind::Structural, os.str());
    }
    if (!lp.W.allFinite() || !lp.b.allFinite()) {
      throw Error(ErrorKind::Structural, "layer " + std::to_string(k) + " has non-finite parameters");
    }
  }
}

double Params::squared_norm() const {
  double total = 0.0;
  for (const auto& lp : layers) total += lp.W.squaredNorm() + lp.b.squaredNorm();
  return total;
}

void Dataset::check() const {
  if (X.rows() != Y.rows()) throw Error(ErrorKind::Precondition, "X and Y disagree on the sample count");
  if (labels) {
    if (labels->size() != size()) throw Error(ErrorKind::Precondition, "label count differs from sample count");
    if (Z) {
      if (Z->rows() != Z->cols() || Z->cols() != Y.cols()) {
        throw Error(ErrorKind::Precondition, "class embedding Z must be m x m with m = columns of Y");
      }
      for (std::size_t i = 0; i < size(); ++i) {
        const int c = (*labels)[i];
        if (c < 0 || c >= Z->rows()) throw Error(ErrorKind::Precondition, "label out of range");
        if (Y.row(static_cast<Eigen::Index>(i)) != Z->row(c)) {
          throw Error(ErrorKind::Precondition, "row " + std::to_string(i) + " of Y is not the embedding of its class");
        }
      }
    }
  }
}

Dataset Dataset::subset(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw Error(ErrorKind::Precondition, "subset exceeds the dataset");
  Dataset out;
  const auto f = static_cast<Eigen::Index>(first);
  const auto c = static_cast<Eigen::Index>(count);
  out.X = X.middleRows(f, c);
  out.Y = Y.middleRows(f, c);
  if (labels) out.labels = std::vector<int>(labels->begin() + f, labels->begin() + f + c);
  out.Z = Z;
  return out;
}

}  // namespace widecnn
