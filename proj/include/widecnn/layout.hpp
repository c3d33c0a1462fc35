#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace widecnn {

/// Builder parameters kept alongside a layout so that it can be written back
/// out in its compact form.
struct FullPatch {
  std::size_t width = 0;
};

struct Strided1d {
  std::size_t width = 0;
  std::size_t size = 0;
  std::size_t stride = 1;
};

/// Valid-padding windows over an H x W x C volume stored in (row, col, channel)
/// order, i.e. neuron index (r * W + c) * C + ch. With per_channel = false a
/// window spans all channels (convolution); with per_channel = true each
/// channel gets its own window (pooling), enumerated as (r', c', ch).
struct Grid2d {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  std::size_t stride = 1;
  bool per_channel = false;

  std::size_t out_height() const;
  std::size_t out_width() const;
};

struct ExplicitPatches {};

using LayoutOrigin = std::variant<ExplicitPatches, FullPatch, Strided1d, Grid2d>;

/// An ordered list of equally sized index patches over a layer of
/// `source_width` neurons. Construction validates: indices in range, equal
/// patch length, no index repeated within a patch, every neuron covered, and
/// no two patches with the same index set.
class PatchLayout {
 public:
  PatchLayout() = default;
  PatchLayout(std::size_t source_width, const std::vector<std::vector<std::size_t>>& patches);

  static PatchLayout full(std::size_t width);
  static PatchLayout strided_1d(std::size_t width, std::size_t size, std::size_t stride);
  static PatchLayout grid_2d(const Grid2d& grid);

  /// Describes why the patches would be rejected, or nullopt when valid.
  static std::optional<std::string> validate(std::size_t source_width,
                                             const std::vector<std::vector<std::size_t>>& patches);

  std::size_t source_width() const { return source_width_; }
  std::size_t patch_count() const { return patch_count_; }
  std::size_t patch_size() const { return patch_size_; }

  std::span<const std::size_t> patch(std::size_t p) const {
    return {indices_.data() + p * patch_size_, patch_size_};
  }
  /// All patches back to back (P * l entries).
  const std::vector<std::size_t>& flat() const { return indices_; }
  std::vector<std::vector<std::size_t>> patches() const;

  const LayoutOrigin& origin() const { return origin_; }
  /// True when the layout is a single patch listing 0..n-1 in order.
  bool is_identity_patch() const;

  friend bool operator==(const PatchLayout& a, const PatchLayout& b) {
    return a.source_width_ == b.source_width_ && a.patch_size_ == b.patch_size_ &&
           a.indices_ == b.indices_;
  }

 private:
  std::size_t source_width_ = 0;
  std::size_t patch_count_ = 0;
  std::size_t patch_size_ = 0;
  std::vector<std::size_t> indices_;
  LayoutOrigin origin_;
};

}  // namespace widecnn
