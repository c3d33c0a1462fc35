#include "widecnn/layout.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "widecnn/error.hpp"

namespace widecnn {

std::size_t Grid2d::out_height() const {
  return height < kernel_h || stride == 0 ? 0 : (height - kernel_h) / stride + 1;
}

std::size_t Grid2d::out_width() const {
  return width < kernel_w || stride == 0 ? 0 : (width - kernel_w) / stride + 1;
}

std::optional<std::string> PatchLayout::validate(
    std::size_t source_width, const std::vector<std::vector<std::size_t>>& patches) {
  std::ostringstream os;
  if (source_width == 0) return "layout over an empty layer";
  if (patches.empty()) return "layout has no patches";
  const std::size_t size = patches.front().size();
  if (size == 0) return "patches must be non-empty";

  std::vector<char> covered(source_width, 0);
  std::set<std::vector<std::size_t>> seen;
  for (std::size_t p = 0; p < patches.size(); ++p) {
    const auto& patch = patches[p];
    if (patch.size() != size) {
      os << "patch " << p << " has length " << patch.size() << ", expected " << size;
      return os.str();
    }
    std::vector<std::size_t> sorted = patch;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      os << "patch " << p << " repeats a neuron index";
      return os.str();
    }
    for (std::size_t idx : patch) {
      if (idx >= source_width) {
        os << "patch " << p << " index " << idx << " out of range [0, " << source_width << ")";
        return os.str();
      }
      covered[idx] = 1;
    }
    if (!seen.insert(std::move(sorted)).second) {
      os << "patch " << p << " duplicates the index set of an earlier patch";
      return os.str();
    }
  }
  const auto miss = std::find(covered.begin(), covered.end(), 0);
  if (miss != covered.end()) {
    os << "neuron " << (miss - covered.begin()) << " belongs to no patch";
    return os.str();
  }
  return std::nullopt;
}

PatchLayout::PatchLayout(std::size_t source_width,
                         const std::vector<std::vector<std::size_t>>& patches) {
  if (auto problem = validate(source_width, patches)) {
    throw Error(ErrorKind::Structural, *problem);
  }
  source_width_ = source_width;
  patch_count_ = patches.size();
  patch_size_ = patches.front().size();
  indices_.reserve(patch_count_ * patch_size_);
  for (const auto& patch : patches) indices_.insert(indices_.end(), patch.begin(), patch.end());
  origin_ = ExplicitPatches{};
}

PatchLayout PatchLayout::full(std::size_t width) {
  if (width == 0) throw Error(ErrorKind::Structural, "full patch over an empty layer");
  PatchLayout layout;
  layout.source_width_ = width;
  layout.patch_count_ = 1;
  layout.patch_size_ = width;
  layout.indices_.resize(width);
  for (std::size_t i = 0; i < width; ++i) layout.indices_[i] = i;
  layout.origin_ = FullPatch{width};
  return layout;
}

PatchLayout PatchLayout::strided_1d(std::size_t width, std::size_t size, std::size_t stride) {
  if (size == 0 || stride == 0 || size > width) {
    throw Error(ErrorKind::Structural, "1d layout needs 0 < size <= width and stride > 0");
  }
  std::vector<std::vector<std::size_t>> patches;
  for (std::size_t start = 0; start + size <= width; start += stride) {
    std::vector<std::size_t> patch(size);
    for (std::size_t r = 0; r < size; ++r) patch[r] = start + r;
    patches.push_back(std::move(patch));
  }
  PatchLayout layout(width, patches);
  layout.origin_ = Strided1d{width, size, stride};
  return layout;
}

PatchLayout PatchLayout::grid_2d(const Grid2d& g) {
  if (g.height == 0 || g.width == 0 || g.channels == 0 || g.kernel_h == 0 || g.kernel_w == 0 ||
      g.stride == 0 || g.kernel_h > g.height || g.kernel_w > g.width) {
    throw Error(ErrorKind::Structural, "2d layout has an empty or oversized window");
  }
  const std::size_t oh = g.out_height();
  const std::size_t ow = g.out_width();
  auto at = [&](std::size_t r, std::size_t c, std::size_t ch) {
    return (r * g.width + c) * g.channels + ch;
  };
  std::vector<std::vector<std::size_t>> patches;
  patches.reserve(oh * ow * (g.per_channel ? g.channels : 1));
  for (std::size_t orow = 0; orow < oh; ++orow) {
    for (std::size_t ocol = 0; ocol < ow; ++ocol) {
      const std::size_t r0 = orow * g.stride;
      const std::size_t c0 = ocol * g.stride;
      if (g.per_channel) {
        for (std::size_t ch = 0; ch < g.channels; ++ch) {
          std::vector<std::size_t> patch;
          patch.reserve(g.kernel_h * g.kernel_w);
          for (std::size_t dr = 0; dr < g.kernel_h; ++dr)
            for (std::size_t dc = 0; dc < g.kernel_w; ++dc) patch.push_back(at(r0 + dr, c0 + dc, ch));
          patches.push_back(std::move(patch));
        }
      } else {
        std::vector<std::size_t> patch;
        patch.reserve(g.kernel_h * g.kernel_w * g.channels);
        for (std::size_t dr = 0; dr < g.kernel_h; ++dr)
          for (std::size_t dc = 0; dc < g.kernel_w; ++dc)
            for (std::size_t ch = 0; ch < g.channels; ++ch) patch.push_back(at(r0 + dr, c0 + dc, ch));
        patches.push_back(std::move(patch));
      }
    }
  }
  PatchLayout layout(g.height * g.width * g.channels, patches);
  layout.origin_ = g;
  return layout;
}

std::vector<std::vector<std::size_t>> PatchLayout::patches() const {
  std::vector<std::vector<std::size_t>> out(patch_count_);
  for (std::size_t p = 0; p < patch_count_; ++p) {
    auto view = patch(p);
    out[p].assign(view.begin(), view.end());
  }
  return out;
}

bool PatchLayout::is_identity_patch() const {
  if (patch_count_ != 1 || patch_size_ != source_width_) return false;
  for (std::size_t i = 0; i < indices_.size(); ++i)
    if (indices_[i] != i) return false;
  return true;
}

}  // namespace widecnn
