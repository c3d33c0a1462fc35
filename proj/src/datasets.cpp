#include "widecnn/harness/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "widecnn/assumptions.hpp"
#include "widecnn/error.hpp"

namespace widecnn {

Dataset one_hot_dataset(Matrix X, const std::vector<int>& labels, std::size_t m) {
  if (labels.size() != static_cast<std::size_t>(X.rows())) {
    throw Error(ErrorKind::Precondition, "label count differs from sample count");
  }
  Dataset data;
  data.X = std::move(X);
  data.Y = Matrix::Zero(data.X.rows(), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= m) {
      throw Error(ErrorKind::Precondition, "label out of range");
    }
    data.Y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  data.labels = labels;
  data.Z = Matrix::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  return data;
}

std::vector<int> balanced_labels(std::size_t N, std::size_t m, std::uint64_t seed) {
  std::vector<int> labels(N);
  for (std::size_t i = 0; i < N; ++i) labels[i] = static_cast<int>(i % m);
  std::mt19937_64 rng(seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

Dataset synthesize_dataset(std::size_t N, std::size_t d, std::size_t m, std::uint64_t seed, double perturb_variance,
                           const std::optional<PatchLayout>& layout) {
  if (N == 0 || d == 0 || m == 0) throw Error(ErrorKind::Precondition, "N, d and m must be positive");
  const PatchLayout patches = layout.value_or(PatchLayout::full(d));
  if (patches.source_width() != d) throw Error(ErrorKind::Structural, "layout does not match the input width");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int draw = 0; draw < 3; ++draw) {
    Matrix X(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = normal(rng);
    X = perturb_dataset(X, perturb_variance, rng());
    if (!check_distinct_patches(X, patches).holds) continue;
    return one_hot_dataset(std::move(X), balanced_labels(N, m, rng()), m);
  }
  throw Error(ErrorKind::Precondition, "could not draw a dataset with distinct patches");
}

Dataset synthetic_digits(std::size_t count, std::uint64_t prototype_seed, std::uint64_t sample_seed,
                         double pixel_noise) {
  constexpr int kSide = 28;
  constexpr int kClasses = 10;
  constexpr int kBlobs = 5;
  std::mt19937_64 proto_rng(prototype_seed);
  std::uniform_real_distribution<double> centre(6.0, 21.0);
  std::vector<std::vector<double>> prototypes(kClasses, std::vector<double>(kSide * kSide, 0.0));
  for (auto& proto : prototypes) {
    for (int b = 0; b < kBlobs; ++b) {
      const double cr = centre(proto_rng), cc = centre(proto_rng);
      for (int r = 0; r < kSide; ++r) {
        for (int c = 0; c < kSide; ++c) {
          const double dist2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
          proto[r * kSide + c] += std::exp(-dist2 / (2.0 * 2.5 * 2.5));
        }
      }
    }
    const double peak = *std::max_element(proto.begin(), proto.end());
    for (double& v : proto) v /= peak;
  }

  std::mt19937_64 rng(sample_seed);
  const std::vector<int> labels = balanced_labels(count, kClasses, rng());
  std::uniform_int_distribution<int> shift(-1, 1);
  std::normal_distribution<double> noise(0.0, pixel_noise);
  Matrix X(static_cast<Eigen::Index>(count), kSide * kSide);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& proto = prototypes[static_cast<std::size_t>(labels[i])];
    const int dr = shift(rng), dc = shift(rng);
    for (int r = 0; r < kSide; ++r) {
      for (int c = 0; c < kSide; ++c) {
        const int sr = r - dr, sc = c - dc;
        const double base = (sr >= 0 && sr < kSide && sc >= 0 && sc < kSide) ? proto[sr * kSide + sc] : 0.0;
        X(static_cast<Eigen::Index>(i), r * kSide + c) = std::clamp(base + noise(rng), 0.0, 1.0);
      }
    }
  }
  return one_hot_dataset(std::move(X), labels, kClasses);
}

}  // namespace widecnn
