#pragma once

// Numerical rank, extreme singular values and null spaces of dense operators
// given as a column subset of a matrix.

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace liftcert {

/// Singular values <= kRankRelTol * sigma_1 * max(rows, cols) count as zero.
inline constexpr double kRankRelTol = 1e-10;
/// Ratio around the threshold inside which a singular value makes the rank
/// indeterminate.
inline constexpr double kRankGapFactor = 100.0;

struct SpectralSummary {
  /// Descending singular values of the nonzero columns.
  std::vector<double> singular_values;
  double sigma_max = 0.0;
  /// Smallest singular value above the threshold; 0 when rank is 0.
  double sigma_min_nonzero = 0.0;
  int rank = 0;
  double threshold = 0.0;
  bool indeterminate = false;
  /// Columns of the operator, zero columns included.
  Eigen::Index columns = 0;
};

struct NullSpace {
  /// columns x dim matrix with orthonormal columns spanning the kernel.
  Eigen::MatrixXd basis;
  SpectralSummary summary;
};

/// Spectrum of the operator formed by `cols` of `A` (all other columns zero).
/// Exactly-zero columns are dropped before the SVD; they contribute only to the
/// kernel. The threshold uses max(A.rows(), A.cols()).
SpectralSummary spectral_summary(const Eigen::MatrixXd& A, std::span<const Eigen::Index> cols);
SpectralSummary spectral_summary(const Eigen::MatrixXd& A);

/// Kernel of the column-restricted operator, expressed in the coordinates of
/// all A.cols() columns.
NullSpace null_space(const Eigen::MatrixXd& A, std::span<const Eigen::Index> cols);

}  // namespace liftcert
