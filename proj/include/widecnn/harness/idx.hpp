#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "widecnn/network.hpp"

namespace widecnn {

/// Raw unsigned-byte image stack as stored in an IDX3 file (magic 0x00000803).
struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major per image
};

/// Big-endian IDX readers. Bad magic, truncation and trailing bytes raise
/// Format errors that name the byte offset.
IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels);

/// Pixels scaled to [0, 1], one-hot targets over 10 classes with Z = I.
Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

}  // namespace widecnn
