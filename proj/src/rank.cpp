#include "widecnn/rank.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "widecnn/error.hpp"

namespace widecnn {

Vector singular_values(const Matrix& A) {
  if (A.size() == 0) return Vector();
  if (!A.allFinite()) throw Error(ErrorKind::Numeric, "singular values of a non-finite matrix");
  // One-sided Jacobi after a pivoted QR: small singular values come out at
  // roundoff level, below the counting threshold for exactly rank-deficient input.
  Eigen::MatrixXd dense = A;
  Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(dense);
  if (svd.info() != Eigen::Success) throw Error(ErrorKind::Numeric, "SVD did not converge");
  Vector s = svd.singularValues();
  if (!s.allFinite()) throw Error(ErrorKind::Numeric, "SVD produced non-finite singular values");
  return s;
}

double rank_threshold(std::size_t rows, std::size_t cols, double sigma_max) {
  const double eps = std::numeric_limits<double>::epsilon();
  return 0.5 * std::sqrt(static_cast<double>(rows + cols + 1)) * sigma_max * eps;
}

RankReport estimate_rank(const Matrix& A) {
  RankReport report;
  report.rows = static_cast<std::size_t>(A.rows());
  report.cols = static_cast<std::size_t>(A.cols());
  report.machine_eps = std::numeric_limits<double>::epsilon();
  if (A.size() == 0) return report;

  const Vector s = singular_values(A);
  report.sigma_max = s[0];
  report.sigma_min = s[s.size() - 1];
  report.threshold = rank_threshold(report.rows, report.cols, report.sigma_max);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > report.threshold) ++report.estimated_rank;
  }
  return report;
}

}  // namespace widecnn
