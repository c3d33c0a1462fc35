#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "widecnn/activation.hpp"
#include "widecnn/layout.hpp"
#include "widecnn/linalg.hpp"

namespace widecnn {

enum class LayerKind { Convolutional, FullyConnected, MaxPool, Output };

const char* to_string(LayerKind kind);

/// One layer of the network. `layout` always lists patches over the previous
/// layer's neurons; for fully connected and output layers it is the single
/// whole-layer patch.
class LayerSpec {
 public:
  static LayerSpec convolutional(PatchLayout layout, std::size_t filters, Activation activation);
  static LayerSpec fully_connected(std::size_t in_width, std::size_t out_width, Activation activation);
  static LayerSpec max_pool(PatchLayout layout);
  static LayerSpec output(std::size_t in_width, std::size_t out_width);

  LayerKind kind() const { return kind_; }
  const PatchLayout& layout() const { return layout_; }
  const Activation& activation() const { return activation_; }

  /// n_{k-1}
  std::size_t in_width() const { return layout_.source_width(); }
  /// n_k = T * P for conv/FC, P for max-pool.
  std::size_t width() const;
  /// T_k (filters); equals out width for FC/output, 0 for max-pool.
  std::size_t filter_count() const { return filters_; }
  /// l_{k-1}
  std::size_t filter_length() const { return layout_.patch_size(); }
  bool has_params() const { return kind_ != LayerKind::MaxPool; }

  friend bool operator==(const LayerSpec& a, const LayerSpec& b) {
    return a.kind_ == b.kind_ && a.filters_ == b.filters_ && a.activation_ == b.activation_ &&
           a.layout_ == b.layout_;
  }

 private:
  LayerSpec() = default;

  LayerKind kind_ = LayerKind::Output;
  PatchLayout layout_;
  std::size_t filters_ = 0;
  Activation activation_ = Activation::identity();
};

/// Layers are numbered 1..L as in the usual notation; layer 0 is the input.
class NetworkSpec {
 public:
  NetworkSpec(std::size_t input_width, std::vector<LayerSpec> layers);

  std::size_t input_width() const { return input_width_; }
  std::size_t depth() const { return layers_.size(); }
  const LayerSpec& layer(std::size_t k) const;
  const std::vector<LayerSpec>& layers() const { return layers_; }
  /// n_k for k in [0, L].
  std::size_t width(std::size_t k) const;
  std::vector<std::size_t> widths() const;
  std::size_t output_width() const { return width(depth()); }
  /// Patches of the input as consumed by layer 1.
  const PatchLayout& input_layout() const { return layers_.front().layout(); }

  /// The network formed by layers from+1..L, taking layer `from` as its input.
  NetworkSpec tail(std::size_t from) const;
  /// The network formed by layers 1..k (no output layer validation).
  std::vector<LayerSpec> head(std::size_t k) const;

  friend bool operator==(const NetworkSpec& a, const NetworkSpec& b) {
    return a.input_width_ == b.input_width_ && a.layers_ == b.layers_;
  }

 private:
  NetworkSpec() = default;

  std::size_t input_width_ = 0;
  std::vector<LayerSpec> layers_;
};

struct LayerParams {
  Matrix W;  // l_{k-1} x T_k
  Vector b;  // n_k
  bool empty() const { return W.size() == 0 && b.size() == 0; }
};

/// Filter matrices and biases per layer; max-pool layers (and layers not yet
/// constructed) hold empty entries.
struct Params {
  std::vector<LayerParams> layers;

  LayerParams& at(std::size_t k) { return layers.at(k - 1); }
  const LayerParams& at(std::size_t k) const { return layers.at(k - 1); }

  static Params zeros(const NetworkSpec& spec);
  /// Entries i.i.d. N(0, scale^2); with fan_in_scaling each layer's filters use
  /// scale / sqrt(l_{k-1}). Biases use the same scale as the filters.
  static Params gaussian(const NetworkSpec& spec, std::uint64_t seed, double scale = 1.0,
                         bool fan_in_scaling = false, std::size_t up_to_layer = 0);

  /// Throws Structural when shapes disagree with the spec for layers 1..up_to
  /// (all layers when up_to is 0) or an entry is non-finite.
  void check(const NetworkSpec& spec, std::size_t up_to_layer = 0) const;

  double squared_norm() const;
};

/// F[k] (post-activation) for k in [0, L] with F[0] = X and G[k]
/// (pre-activation) for parameterized layers; G[0] and pooling G's are empty.
struct ForwardTrace {
  std::vector<Matrix> F;
  std::vector<Matrix> G;

  const Matrix& output() const { return F.back(); }
  std::size_t samples() const { return F.front().rows(); }
};

struct Dataset {
  Matrix X;
  Matrix Y;
  std::optional<std::vector<int>> labels;
  std::optional<Matrix> Z;

  std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
  /// Throws Precondition if shapes disagree or labelled rows don't match Z.
  void check() const;
  Dataset subset(std::size_t first, std::size_t count) const;
};

}  // namespace widecnn
