#include "liftcert/spectral.hpp"

#include <algorithm>
#include <numeric>

namespace liftcert {

namespace {

struct Compressed {
  Eigen::MatrixXd B;
  std::vector<Eigen::Index> kept;    // nonzero columns, positions in A
  std::vector<Eigen::Index> zeroed;  // positions in A that are identically zero
};

Compressed compress(const Eigen::MatrixXd& A, std::span<const Eigen::Index> cols) {
  Compressed c;
  std::vector<char> selected(A.cols(), 0);
  for (Eigen::Index j : cols) selected.at(j) = 1;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    if (selected[j] && (A.col(j).array() != 0.0).any()) {
      c.kept.push_back(j);
    } else {
      c.zeroed.push_back(j);
    }
  }
  c.B.resize(A.rows(), static_cast<Eigen::Index>(c.kept.size()));
  for (std::size_t i = 0; i < c.kept.size(); ++i) c.B.col(i) = A.col(c.kept[i]);
  return c;
}

SpectralSummary summarize(const Eigen::VectorXd& sv, const Eigen::MatrixXd& A) {
  SpectralSummary s;
  s.columns = A.cols();
  s.singular_values.assign(sv.data(), sv.data() + sv.size());
  if (sv.size() == 0 || sv(0) == 0.0) return s;
  s.sigma_max = sv(0);
  s.threshold = kRankRelTol * sv(0) * static_cast<double>(std::max(A.rows(), A.cols()));
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > s.threshold) {
      ++s.rank;
      s.sigma_min_nonzero = sv(i);
    }
    if (sv(i) > s.threshold / kRankGapFactor && sv(i) <= s.threshold * kRankGapFactor) {
      s.indeterminate = true;
    }
  }
  return s;
}

}  // namespace

SpectralSummary spectral_summary(const Eigen::MatrixXd& A, std::span<const Eigen::Index> cols) {
  Compressed c = compress(A, cols);
  if (c.B.cols() == 0) return summarize(Eigen::VectorXd(), A);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(c.B);
  return summarize(svd.singularValues(), A);
}

SpectralSummary spectral_summary(const Eigen::MatrixXd& A) {
  std::vector<Eigen::Index> all(A.cols());
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  return spectral_summary(A, all);
}

NullSpace null_space(const Eigen::MatrixXd& A, std::span<const Eigen::Index> cols) {
  Compressed c = compress(A, cols);
  NullSpace out;
  Eigen::MatrixXd V;
  if (c.B.cols() > 0) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(c.B, Eigen::ComputeFullV);
    out.summary = summarize(svd.singularValues(), A);
    V = svd.matrixV();
  } else {
    out.summary = summarize(Eigen::VectorXd(), A);
  }
  const Eigen::Index inner_null = static_cast<Eigen::Index>(c.kept.size()) - out.summary.rank;
  const Eigen::Index dim = static_cast<Eigen::Index>(c.zeroed.size()) + inner_null;
  out.basis = Eigen::MatrixXd::Zero(A.cols(), dim);
  Eigen::Index col = 0;
  for (Eigen::Index j : c.zeroed) out.basis(j, col++) = 1.0;
  for (Eigen::Index v = out.summary.rank; v < static_cast<Eigen::Index>(c.kept.size()); ++v, ++col) {
    for (std::size_t i = 0; i < c.kept.size(); ++i) out.basis(c.kept[i], col) = V(i, v);
  }
  return out;
}

}  // namespace liftcert
