#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "widecnn/network.hpp"

namespace widecnn {

struct ConvStructureResult {
  bool holds = false;
  double full_rank_fraction = 0.0;
};

/// Samples `trials` standard Gaussian filter matrices for layer k and reports
/// how many lift to a full-rank U.
ConvStructureResult check_conv_structure(const NetworkSpec& spec, std::size_t k, std::size_t trials,
                                         std::uint64_t seed);

/// (i, j, p, q) with i < j: patch p of sample i is within tolerance of patch q
/// of sample j.
struct PatchCollision {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t p = 0;
  std::size_t q = 0;

  friend auto operator<=>(const PatchCollision&, const PatchCollision&) = default;
};

struct DistinctPatchesResult {
  bool holds = true;
  std::optional<PatchCollision> witness;  // lexicographically smallest collision
};

/// Checks that every patch of every sample is farther than `tolerance` in max
/// norm from every patch of every other sample.
DistinctPatchesResult check_distinct_patches(const Matrix& X, const PatchLayout& layout,
                                             double tolerance = 0.0);

/// X + E with E_ij ~ N(0, variance) i.i.d.; deterministic for a seed.
Matrix perturb_dataset(const Matrix& X, double variance, std::uint64_t seed);

/// Rejects hidden activations (layers 1..up_to, all hidden layers when 0)
/// that fail the growth condition, in particular the identity. Returns a
/// reason, or nullopt when all pass.
std::optional<std::string> hidden_activation_problem(const NetworkSpec& spec, std::size_t up_to_layer = 0);

}  // namespace widecnn
