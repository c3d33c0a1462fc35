#include "widecnn/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "widecnn/error.hpp"
#include "widecnn/lifting.hpp"
#include "widecnn/rank.hpp"

namespace widecnn {

ConvStructureResult check_conv_structure(const NetworkSpec& spec, std::size_t k, std::size_t trials,
                                         std::uint64_t seed) {
  if (trials == 0) throw Error(ErrorKind::Precondition, "need at least one trial");
  const LayerSpec& layer = spec.layer(k);
  if (!layer.has_params()) throw Error(ErrorKind::UnsupportedLayer, "layer " + std::to_string(k) + " is max-pool");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t full = 0;
  Matrix W(static_cast<Eigen::Index>(layer.filter_length()), static_cast<Eigen::Index>(layer.filter_count()));
  for (std::size_t trial = 0; trial < trials; ++trial) {
    for (Eigen::Index i = 0; i < W.size(); ++i) W.data()[i] = normal(rng);
    if (estimate_rank(lift_weights(layer, W)).full_rank()) ++full;
  }
  ConvStructureResult result;
  result.holds = full > 0;
  result.full_rank_fraction = static_cast<double>(full) / static_cast<double>(trials);
  return result;
}

namespace {

struct PatchRef {
  std::size_t sample;
  std::size_t patch;
};

// Smallest collision between two member lists (each sorted by sample, patch),
// or nullopt when every pairing stays within one sample.
std::optional<PatchCollision> first_cross(const std::vector<PatchRef>& a, const std::vector<PatchRef>& b) {
  std::optional<PatchCollision> best;
  auto consider = [&](const PatchRef& x, const PatchRef& y) {
    PatchCollision c = x.sample < y.sample ? PatchCollision{x.sample, y.sample, x.patch, y.patch}
                                           : PatchCollision{y.sample, x.sample, y.patch, x.patch};
    if (!best || c < *best) best = c;
  };
  // The minimal pair starts from the smallest member of one side; pairing it
  // with the first partner from another sample on the other side is minimal
  // for that anchor.
  for (const auto* side : {&a, &b}) {
    const auto& anchor_list = *side;
    const auto& other = side == &a ? b : a;
    const PatchRef& anchor = anchor_list.front();
    for (const PatchRef& y : other) {
      if (y.sample != anchor.sample) {
        consider(anchor, y);
        break;
      }
    }
    // Anchors from the same sample as other.front() may still pair with later
    // samples; the smallest other-side element is a partner for the first
    // anchor of a different sample.
    for (const PatchRef& x : anchor_list) {
      if (x.sample != other.front().sample) {
        consider(x, other.front());
        break;
      }
    }
  }
  return best;
}

}  // namespace

DistinctPatchesResult check_distinct_patches(const Matrix& X, const PatchLayout& layout, double tolerance) {
  if (tolerance < 0.0) throw Error(ErrorKind::Precondition, "tolerance must be non-negative");
  if (static_cast<std::size_t>(X.cols()) != layout.source_width()) {
    throw Error(ErrorKind::Structural, "layout does not match the input width");
  }
  const std::size_t N = static_cast<std::size_t>(X.rows());
  const std::size_t P = layout.patch_count();
  const std::size_t l = layout.patch_size();
  DistinctPatchesResult result;
  if (N < 2) return result;

  auto value = [&](std::size_t e, std::size_t r) {
    return X(static_cast<Eigen::Index>(e / P), static_cast<Eigen::Index>(layout.flat()[(e % P) * l + r]));
  };

  // Group exactly equal patches first; identical vectors from different
  // samples collide for every tolerance.
  std::vector<std::size_t> order(N * P);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t r = 0; r < l; ++r) {
      const double va = value(a, r), vb = value(b, r);
      if (va != vb) return va < vb;
    }
    return false;
  });
  auto equal = [&](std::size_t a, std::size_t b) {
    for (std::size_t r = 0; r < l; ++r)
      if (value(a, r) != value(b, r)) return false;
    return true;
  };

  std::vector<std::vector<PatchRef>> groups;
  std::vector<std::size_t> representative;
  for (std::size_t s = 0; s < order.size();) {
    std::size_t e = s + 1;
    while (e < order.size() && equal(order[s], order[e])) ++e;
    std::vector<PatchRef> members;
    for (std::size_t x = s; x < e; ++x) members.push_back({order[x] / P, order[x] % P});
    std::sort(members.begin(), members.end(), [](const PatchRef& a, const PatchRef& b) {
      return std::tie(a.sample, a.patch) < std::tie(b.sample, b.patch);
    });
    groups.push_back(std::move(members));
    representative.push_back(order[s]);
    s = e;
  }

  std::optional<PatchCollision> best;
  auto keep = [&](const std::optional<PatchCollision>& c) {
    if (c && (!best || *c < *best)) best = c;
  };
  for (const auto& members : groups) {
    // Within a group: smallest sample, its first patch, then the next sample.
    const PatchRef& first = members.front();
    for (const PatchRef& other : members) {
      if (other.sample != first.sample) {
        keep(PatchCollision{first.sample, other.sample, first.patch, other.patch});
        break;
      }
    }
  }

  if (tolerance > 0.0 && groups.size() > 1) {
    // Sweep over a random projection: |v.(a-b)| <= |v|_1 * maxnorm(a-b).
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> v(l);
    double v_l1 = 0.0;
    for (auto& c : v) {
      c = unif(rng);
      v_l1 += std::abs(c);
    }
    std::vector<double> key(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
      double s = 0.0;
      for (std::size_t r = 0; r < l; ++r) s += v[r] * value(representative[g], r);
      key[g] = s;
    }
    std::vector<std::size_t> by_key(groups.size());
    std::iota(by_key.begin(), by_key.end(), 0);
    std::sort(by_key.begin(), by_key.end(), [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
    const double window = v_l1 * tolerance * (1.0 + 1e-12);
    for (std::size_t x = 0; x < by_key.size(); ++x) {
      const std::size_t ga = by_key[x];
      for (std::size_t y = x + 1; y < by_key.size() && key[by_key[y]] - key[ga] <= window; ++y) {
        const std::size_t gb = by_key[y];
        double dist = 0.0;
        for (std::size_t r = 0; r < l && dist <= tolerance; ++r) {
          dist = std::max(dist, std::abs(value(representative[ga], r) - value(representative[gb], r)));
        }
        if (dist <= tolerance) keep(first_cross(groups[ga], groups[gb]));
      }
    }
  }

  if (best) {
    result.holds = false;
    result.witness = best;
  }
  return result;
}

Matrix perturb_dataset(const Matrix& X, double variance, std::uint64_t seed) {
  if (variance < 0.0) throw Error(ErrorKind::Precondition, "perturbation variance must be non-negative");
  if (variance == 0.0) return X;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(variance));
  Matrix out = X;
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += normal(rng);
  return out;
}

std::optional<std::string> hidden_activation_problem(const NetworkSpec& spec, std::size_t up_to_layer) {
  const std::size_t last = up_to_layer == 0 ? spec.depth() - 1 : up_to_layer;
  for (std::size_t k = 1; k <= last; ++k) {
    const LayerSpec& layer = spec.layer(k);
    if (!layer.has_params() || layer.kind() == LayerKind::Output) continue;
    if (layer.activation().kind() == ActivationKind::Identity) {
      return "layer " + std::to_string(k) + " uses the identity activation on a hidden layer";
    }
    if (!layer.activation().profile().satisfies_growth_condition()) {
      return "layer " + std::to_string(k) + " activation " + layer.activation().name() +
             " fails the growth condition";
    }
  }
  return std::nullopt;
}

}  // namespace widecnn
