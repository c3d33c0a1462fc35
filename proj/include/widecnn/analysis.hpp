#pragma once

#include <optional>
#include <vector>

#include "widecnn/network.hpp"
#include "widecnn/rank.hpp"

namespace widecnn {

/// Per-layer factors of the gradient sandwich for l = k+1..L-1.
struct BoundFactor {
  std::size_t layer = 0;             // l
  double sigma_min_U = 0.0;          // sigma_min(U_{l+1})
  double sigma_max_U = 0.0;          // sigma_max(U_{l+1})
  double min_abs_derivative = 0.0;   // min |s_l'(G_l)|
  double max_abs_derivative = 0.0;   // max |s_l'(G_l)|
};

struct BoundReport {
  std::size_t wide_layer = 0;
  double lower = 0.0;
  double upper = 0.0;
  double grad_norm = 0.0;  // ||grad_{U_{k+1}} Phi||_F
  double residual = 0.0;   // ||F_L - Y||_F
  double sigma_min_F = 0.0;
  double sigma_max_F = 0.0;
  // The products in front of the residual.
  double lower_factor = 0.0;
  double upper_factor = 0.0;
  std::vector<BoundFactor> factors;

  bool sandwich_holds(double relative_slack = 1e-8) const;
};

/// Evaluates both sides of
///   sigma_min(F_k) prod[sigma_min(U_{l+1}) |s_l'(G_l)|_min] ||F_L - Y||_F
///     <= ||grad_{U_{k+1}} Phi||_F <=
///   sigma_max(F_k) prod[sigma_max(U_{l+1}) |s_l'(G_l)|_max] ||F_L - Y||_F.
/// The sigma_min(F_k) factor is 0 when n_k < N since F_k^T then has a kernel.
/// Throws Precondition for pooling above k or non-pyramidal widths.
BoundReport gradient_bounds(const NetworkSpec& spec, const Params& params, const ForwardTrace& trace,
                            const Matrix& Y, std::size_t k);

struct SkMembership {
  bool in_S_k = false;
  RankReport features;           // F_k
  std::vector<RankReport> lifted;  // U_{k+2}..U_L
};

/// rank(F_k) = N and U_{k+2}..U_L of full rank.
SkMembership s_k_membership(const NetworkSpec& spec, const Params& params, const ForwardTrace& trace,
                            std::size_t k);

struct CriticalPointReport {
  bool applicable = false;  // false outside S_k
  double loss = 0.0;
  double grad_norm = 0.0;
  double grad_tolerance = 0.0;  // upper factor * sqrt(2 tol)
  bool equivalence_holds = false;
  SkMembership membership;
};

/// Checks (Phi <= tol) == (||grad_{U_{k+1}} Phi||_F <= tol'), where tol' is what
/// the upper gradient bound permits for a point with Phi = tol.
CriticalPointReport critical_point_check(const NetworkSpec& spec, const Params& params, const Dataset& data,
                                         std::size_t k, double tol);

struct WidthAudit {
  std::vector<std::size_t> widths;  // n_0..n_L
  std::size_t max_width = 0;        // over hidden layers
  std::size_t arg_layer = 0;
  bool wide_enough = false;
  std::optional<std::size_t> pyramidal_from;
};

WidthAudit width_audit(const NetworkSpec& spec, std::size_t N);

}  // namespace widecnn
