#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "widecnn/network.hpp"
#include "widecnn/rank.hpp"

namespace widecnn {

struct ConstructionParams {
  /// Scales tried for alpha, in increasing order. The transport step divides
  /// by them, the independence step multiplies by them.
  std::vector<double> alpha_schedule;
  /// Bias offset; the activation's default_beta() when unset.
  std::optional<double> beta;
  double sigma_min_floor = 1e-10;
  std::uint64_t seed = 0;
  /// Fresh Gaussian filter draws allowed per layer before giving up.
  std::size_t resample_budget = 16;
  /// Relative gap below which two inner products count as colliding.
  double collision_tolerance = 1e-12;

  /// Schedule 2^0..2^20, sigma_min_floor 1e-10.
  static ConstructionParams defaults(std::uint64_t seed = 0);
  /// Throws Precondition on an empty or non-increasing schedule or a
  /// non-positive floor.
  void validate() const;
};

/// Parameters for layers 1..k that keep every feature entry of one sample
/// apart from every feature entry of every other sample, with all lifted U_l
/// of full rank. Max-pool layers among 1..k are passed through.
Params transport_construction(const NetworkSpec& spec, const Matrix& X, std::size_t k,
                              const ConstructionParams& cfg);

struct IndependenceResult {
  Params params;                   // layers 1..k set, the rest empty
  std::vector<std::size_t> gamma;  // unit j of layer k is matched with sample gamma[j]
  double alpha = 0.0;
  double submatrix_sigma_min = 0.0;  // of the N x N block F_k[:, 0..N-1]
  RankReport rank;                   // of F_k
};

/// Parameters for layers 1..k with rank(F_k) = N: layers below k come from
/// transport_construction, layer k uses W_k = -alpha Q and biases placed at
/// the sorted inner products so that F_k restricted to its first N units is
/// triangular up to vanishing terms.
IndependenceResult independence_construction(const NetworkSpec& spec, const Matrix& X, std::size_t k,
                                              const ConstructionParams& cfg);

/// F^T z with (F F^T) z = R, the minimum-norm solution of F W = R. Throws
/// IllConditioned when cond(F F^T) exceeds 1e12.
Matrix min_norm_solution(const Matrix& F, const Matrix& R);

struct ExpressivityResult {
  Params params;  // all layers; the output filter is lambda
  Vector lambda;
  double max_residual = 0.0;  // max_i |f_L(x_i) - y_i| / (1 + |y_i|)
};

/// Exact interpolation of scalar targets: independence at layer L-1 followed
/// by lambda = F^T (F F^T)^{-1} y.
ExpressivityResult expressivity_fit(const NetworkSpec& spec, const Matrix& X, const Vector& y,
                                    const ConstructionParams& cfg);

struct ZeroLossResult {
  Params params;
  int proof_case = 0;  // 1: k = L-1, 2: k = L-2, 3: k <= L-3
  double loss = 0.0;
};

/// Parameters for every layer with Phi = 0 up to rounding and rank(F_k) = N.
/// Needs labels and Z on the dataset, pyramidal widths above k, strictly
/// monotone hidden activations above k and a fully connected layer k+1.
ZeroLossResult zero_loss_construction(const NetworkSpec& spec, const Dataset& data, std::size_t k,
                                      const ConstructionParams& cfg);

}  // namespace widecnn
