#pragma once

#include <string>
#include <vector>

#include "widecnn/linalg.hpp"

namespace widecnn {

/// Numerical rank of a matrix: singular values strictly above
/// 0.5 * sqrt(m + n + 1) * sigma_max * eps are counted.
struct RankReport {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t estimated_rank = 0;
  double sigma_min = 0.0;  // smallest of the min(m, n) singular values
  double sigma_max = 0.0;
  double threshold = 0.0;
  double machine_eps = 0.0;

  bool full_rank() const { return estimated_rank == std::min(rows, cols); }
  bool full_row_rank() const { return estimated_rank == rows; }
};

/// Singular values in decreasing order (min(m, n) of them). Throws Numeric if
/// the decomposition fails or the input is not finite.
Vector singular_values(const Matrix& A);

double rank_threshold(std::size_t rows, std::size_t cols, double sigma_max);

RankReport estimate_rank(const Matrix& A);

}  // namespace widecnn
