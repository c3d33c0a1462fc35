// Oracles and random fixtures shared by the unit tests and the acceptance run.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "widecnn/activation.hpp"
#include "widecnn/forward.hpp"
#include "widecnn/layout.hpp"
#include "widecnn/network.hpp"

namespace widecnn::testing {

/// Rank by Gaussian elimination with partial pivoting; pivots at or below
/// cutoff * max|A| count as zero.
inline std::size_t elimination_rank(Matrix A, double relative_cutoff = 1e-10) {
  const double scale = A.size() ? A.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return 0;
  const double tol = relative_cutoff * scale;
  std::size_t rank = 0;
  for (Eigen::Index c = 0; c < A.cols() && rank < static_cast<std::size_t>(A.rows()); ++c) {
    const auto r0 = static_cast<Eigen::Index>(rank);
    Eigen::Index pivot = r0;
    for (Eigen::Index r = r0; r < A.rows(); ++r) {
      if (std::abs(A(r, c)) > std::abs(A(pivot, c))) pivot = r;
    }
    if (std::abs(A(pivot, c)) <= tol) continue;
    A.row(pivot).swap(A.row(r0));
    for (Eigen::Index r = r0 + 1; r < A.rows(); ++r) {
      const double f = A(r, c) / A(r0, c);
      A.row(r) -= f * A.row(r0);
    }
    ++rank;
  }
  return rank;
}

inline Matrix gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Matrix A(rows, cols);
  for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = normal(rng);
  return A;
}

/// Exactly rank r (with probability one): small integer factors keep every
/// product entry exact in double precision.
inline Matrix planted_rank(Eigen::Index m, Eigen::Index n, Eigen::Index r, std::mt19937_64& rng) {
  for (;;) {
    std::uniform_int_distribution<int> digit(-9, 9);
    Matrix B(m, r), C(r, n);
    for (Eigen::Index i = 0; i < B.size(); ++i) B.data()[i] = digit(rng);
    for (Eigen::Index i = 0; i < C.size(); ++i) C.data()[i] = digit(rng);
    Matrix A = B * C;
    if (r == 0) return Matrix::Zero(m, n);
    if (Eigen::FullPivLU<Matrix>(A).rank() == r) return A;
  }
}

/// Definition-level evaluation of one conv/FC layer: every sample, patch and
/// filter in explicit loops.
inline Matrix naive_layer(const LayerSpec& layer, const LayerParams& lp, const Matrix& F_prev) {
  const std::size_t P = layer.layout().patch_count();
  const std::size_t T = layer.filter_count();
  const std::size_t l = layer.filter_length();
  Matrix out(F_prev.rows(), static_cast<Eigen::Index>(layer.width()));
  for (Eigen::Index i = 0; i < F_prev.rows(); ++i) {
    for (std::size_t p = 0; p < P; ++p) {
      const auto patch = layer.layout().patch(p);
      for (std::size_t t = 0; t < T; ++t) {
        const auto h = static_cast<Eigen::Index>(p * T + t);
        double g = lp.b[h];
        for (std::size_t r = 0; r < l; ++r) {
          g += lp.W(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) *
               F_prev(i, static_cast<Eigen::Index>(patch[r]));
        }
        out(i, h) = layer.kind() == LayerKind::Output ? g : layer.activation()(g);
      }
    }
  }
  return out;
}

inline Matrix naive_pool(const PatchLayout& layout, const Matrix& F_prev) {
  Matrix out(F_prev.rows(), static_cast<Eigen::Index>(layout.patch_count()));
  for (Eigen::Index i = 0; i < F_prev.rows(); ++i) {
    for (std::size_t p = 0; p < layout.patch_count(); ++p) {
      double best = -INFINITY;
      for (std::size_t idx : layout.patch(p)) best = std::max(best, F_prev(i, static_cast<Eigen::Index>(idx)));
      out(i, static_cast<Eigen::Index>(p)) = best;
    }
  }
  return out;
}

inline Matrix naive_forward(const NetworkSpec& spec, const Params& params, const Matrix& X) {
  Matrix F = X;
  for (std::size_t k = 1; k <= spec.depth(); ++k) {
    const LayerSpec& layer = spec.layer(k);
    F = layer.kind() == LayerKind::MaxPool ? naive_pool(layer.layout(), F) : naive_layer(layer, params.at(k), F);
  }
  return F;
}

/// A valid layout of up to P random patches of size l over n neurons. The
/// first patches cover a shuffled 0..n-1 in chunks; the rest are random
/// subsets, skipping repeats of an index set already used.
inline PatchLayout random_layout(std::size_t n, std::size_t l, std::size_t P, std::mt19937_64& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<std::size_t>> patches;
  std::vector<std::vector<std::size_t>> seen;
  auto add = [&](std::vector<std::size_t> patch) {
    std::vector<std::size_t> key = patch;
    std::sort(key.begin(), key.end());
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) return;
    seen.push_back(key);
    patches.push_back(std::move(patch));
  };
  for (std::size_t start = 0; start < n; start += l) {
    std::vector<std::size_t> patch(perm.begin() + static_cast<std::ptrdiff_t>(start),
                                   perm.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + l)));
    for (std::size_t fill = 0; patch.size() < l; ++fill) {
      if (std::find(patch.begin(), patch.end(), perm[fill]) == patch.end()) patch.push_back(perm[fill]);
    }
    add(std::move(patch));
  }
  for (int attempt = 0; attempt < 200 && patches.size() < P; ++attempt) {
    std::shuffle(perm.begin(), perm.end(), rng);
    add(std::vector<std::size_t>(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(l)));
  }
  return PatchLayout(n, patches);
}

inline Activation pick_activation(std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? Activation::sigmoid() : Activation::softplus(2.0);
}

/// Random 1D conv net followed by fully connected layers with nonincreasing
/// widths: depth 2..max_depth, every width at most max_width and the first
/// hidden layer at least min_first_width wide.
inline NetworkSpec random_network(std::mt19937_64& rng, std::size_t max_depth, std::size_t max_width,
                                  std::size_t min_first_width, bool mixed_activations = true) {
  auto pick = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  const Activation act = mixed_activations ? pick_activation(rng) : Activation::sigmoid();
  for (;;) {
    const std::size_t d = pick(3, 8);
    const std::size_t patch = pick(1, d);
    const std::size_t stride = pick(1, std::max<std::size_t>(1, patch));
    if ((d - patch) % stride != 0) continue;
    const std::size_t P = (d - patch) / stride + 1;
    const std::size_t T = std::max<std::size_t>(pick(1, 4), (min_first_width + P - 1) / P);
    if (P * T > max_width) continue;
    std::vector<LayerSpec> layers;
    layers.push_back(LayerSpec::convolutional(PatchLayout::strided_1d(d, patch, stride), T, act));
    const std::size_t depth = pick(2, max_depth);
    std::size_t width = P * T;
    for (std::size_t k = 2; k < depth; ++k) {
      width = pick(std::max<std::size_t>(1, width / 2), width);
      layers.push_back(LayerSpec::fully_connected(layers.back().width(), width, act));
    }
    const std::size_t m = pick(1, std::min<std::size_t>(3, width));
    layers.push_back(LayerSpec::output(layers.back().width(), m));
    return NetworkSpec(d, std::move(layers));
  }
}

}  // namespace widecnn::testing
