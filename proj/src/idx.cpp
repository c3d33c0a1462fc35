#include "widecnn/harness/idx.hpp"

#include <fstream>
#include <iterator>
#include <sstream>

#include "widecnn/error.hpp"

namespace widecnn {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;
constexpr std::size_t kClasses = 10;

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Format, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t offset, const std::string& what) {
  std::ostringstream os;
  os << path.string() << " at byte " << offset << ": " << what;
  throw Error(ErrorKind::Format, os.str());
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& bytes, std::size_t offset, const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) fail(path, offset, "file truncated inside the header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                     static_cast<char>(v)};
  out.write(b, 4);
}

void check_payload(const std::vector<std::uint8_t>& bytes, std::size_t header, std::size_t payload,
                   const std::filesystem::path& path) {
  if (bytes.size() < header + payload) {
    std::ostringstream os;
    os << "file truncated: expected " << payload << " data bytes, found " << bytes.size() - header;
    fail(path, bytes.size(), os.str());
  }
  if (bytes.size() > header + payload) fail(path, header + payload, "unexpected trailing bytes");
}

}  // namespace

IdxImages read_idx_images(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = slurp(path);
  const std::uint32_t magic = read_u32(bytes, 0, path);
  if (magic != kImageMagic) {
    std::ostringstream os;
    os << "bad magic 0x" << std::hex << magic << ", expected 0x803 for images";
    fail(path, 0, os.str());
  }
  IdxImages images;
  images.count = read_u32(bytes, 4, path);
  images.rows = read_u32(bytes, 8, path);
  images.cols = read_u32(bytes, 12, path);
  check_payload(bytes, 16, images.count * images.rows * images.cols, path);
  images.pixels.assign(bytes.begin() + 16, bytes.end());
  return images;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = slurp(path);
  const std::uint32_t magic = read_u32(bytes, 0, path);
  if (magic != kLabelMagic) {
    std::ostringstream os;
    os << "bad magic 0x" << std::hex << magic << ", expected 0x801 for labels";
    fail(path, 0, os.str());
  }
  const std::size_t count = read_u32(bytes, 4, path);
  check_payload(bytes, 8, count, path);
  return {bytes.begin() + 8, bytes.end()};
}

void write_idx_images(const std::filesystem::path& path, const IdxImages& images) {
  if (images.pixels.size() != images.count * images.rows * images.cols) {
    throw Error(ErrorKind::Format, "pixel buffer does not match the image dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Format, "cannot write " + path.string());
  put_u32(out, kImageMagic);
  put_u32(out, static_cast<std::uint32_t>(images.count));
  put_u32(out, static_cast<std::uint32_t>(images.rows));
  put_u32(out, static_cast<std::uint32_t>(images.cols));
  out.write(reinterpret_cast<const char*>(images.pixels.data()), static_cast<std::streamsize>(images.pixels.size()));
}

void write_idx_labels(const std::filesystem::path& path, const std::vector<std::uint8_t>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Format, "cannot write " + path.string());
  put_u32(out, kLabelMagic);
  put_u32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

Dataset load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
  const IdxImages images = read_idx_images(images_path);
  const std::vector<std::uint8_t> labels = read_idx_labels(labels_path);
  if (labels.size() != images.count) {
    std::ostringstream os;
    os << labels.size() << " labels for " << images.count << " images";
    fail(labels_path, 4, os.str());
  }
  const auto N = static_cast<Eigen::Index>(images.count);
  const auto d = static_cast<Eigen::Index>(images.rows * images.cols);
  Dataset data;
  data.X.resize(N, d);
  for (Eigen::Index i = 0; i < data.X.size(); ++i) {
    data.X.data()[i] = static_cast<double>(images.pixels[static_cast<std::size_t>(i)]) / 255.0;
  }
  data.Y = Matrix::Zero(N, static_cast<Eigen::Index>(kClasses));
  std::vector<int> classes(images.count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= kClasses) fail(labels_path, 8 + i, "label " + std::to_string(labels[i]) + " out of range");
    classes[i] = labels[i];
    data.Y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  data.labels = std::move(classes);
  data.Z = Matrix::Identity(static_cast<Eigen::Index>(kClasses), static_cast<Eigen::Index>(kClasses));
  return data;
}

}  // namespace widecnn
