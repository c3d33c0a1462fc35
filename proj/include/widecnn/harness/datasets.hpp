#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "widecnn/layout.hpp"
#include "widecnn/network.hpp"

namespace widecnn {

/// One-hot targets for labels in [0, m) together with Z = I_m.
Dataset one_hot_dataset(Matrix X, const std::vector<int>& labels, std::size_t m);

/// Balanced labels (class sizes differ by at most one) in a seeded random order.
std::vector<int> balanced_labels(std::size_t N, std::size_t m, std::uint64_t seed);

/// Gaussian X (N x d), balanced random labels, one-hot Y, perturbed by
/// N(0, perturb_variance) noise. The distinct-patch assumption is checked
/// against `layout` (the whole row when absent); after three failed draws a
/// Precondition error is raised.
Dataset synthesize_dataset(std::size_t N, std::size_t d, std::size_t m, std::uint64_t seed, double perturb_variance,
                           const std::optional<PatchLayout>& layout = std::nullopt);

/// 28 x 28 images of ten classes used when no MNIST files are available.
/// Every class has a prototype of smooth blobs fixed by `prototype_seed`;
/// samples are shifted by up to one pixel and carry pixel noise of the given
/// standard deviation, clipped to [0, 1].
Dataset synthetic_digits(std::size_t count, std::uint64_t prototype_seed, std::uint64_t sample_seed,
                         double pixel_noise = 0.15);

}  // namespace widecnn
