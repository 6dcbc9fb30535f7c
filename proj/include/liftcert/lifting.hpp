#pragma once

// The lifting operator A, with A P(h) = M_1(h_1) ... M_K(h_K), its support
// restrictions, and the path-structure tests built on it.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "liftcert/network.hpp"
#include "liftcert/spectral.hpp"
#include "liftcert/tensor.hpp"

namespace liftcert {

/// Entries within this distance of 0 or 1 pass the {0,1} test.
inline constexpr double kBinaryEntryTol = 1e-9;
/// Null-space basis entries on valid indices must stay below this.
inline constexpr double kKernelVanishTol = 1e-8;

/// Dense matrix of A: one column per multi-index (row-major tensor order),
/// one row per entry of the output matrix (column-major flattening).
class LiftingOperator {
 public:
  LiftingOperator() = default;
  LiftingOperator(int K, int S, Eigen::Index out_rows, Eigen::Index out_cols, Eigen::MatrixXd matrix);

  int K() const { return K_; }
  int S() const { return S_; }
  Eigen::Index output_rows() const { return out_rows_; }
  Eigen::Index output_cols() const { return out_cols_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }

  Eigen::Index column_of(const MultiIndex& i) const;
  MultiIndex index_of_column(Eigen::Index col) const;
  /// Columns whose multi-index lies in the S-cube, ascending.
  std::vector<Eigen::Index> cube_columns(const Support& S) const;

  /// A T reshaped to the output matrix.
  Eigen::MatrixXd apply(const TensorK& T) const;

 private:
  int K_ = 0;
  int S_ = 0;
  Eigen::Index out_rows_ = 0;
  Eigen::Index out_cols_ = 0;
  Eigen::MatrixXd matrix_;
};

/// Column i is the flattened product M_1(h^i_1) ... M_K(h^i_K) of the
/// indicator tuple h^i.
LiftingOperator build_lifting(const FactorMaps& fm);

/// A P_S: columns outside the S-cube zeroed.
LiftingOperator lift_restricted(const LiftingOperator& A, const Support& S);

struct BinaryWitness {
  std::size_t member_a = 0;  // family indices of the offending pair
  std::size_t member_b = 0;
  int leaf = 0;              // leaf block of the output matrix
  int row = 0;               // 0-based output row
  int column = 0;            // 0-based column inside the leaf block
  double value = 0.0;
};

/// Necessary-condition verdict: failing proves the sparse model is not
/// identifiable; passing does not prove that it is.
struct IdentifiabilityResult {
  bool pass = true;
  std::optional<BinaryWitness> witness;
  std::size_t pairs_checked = 0;
};

/// For every unordered pair (S, S') of the family, including S = S', checks
/// that M_1(1^U) ... M_K(1^U) with U = S u S' has only entries in {0, 1}.
IdentifiabilityResult identifiability_test(const NetworkTopology& topo, const FactorMaps& fm,
                                           const SupportFamily& family);
IdentifiabilityResult identifiability_test(const NetworkTopology& topo, const SupportFamily& family);

/// I_S: multi-indices of the S-cube whose layer edges form a leaf-to-root
/// path, in row-major order.
std::vector<MultiIndex> valid_index_set(const Support& S, const NetworkTopology& topo);

struct DisjointnessResult {
  bool pass = true;
  int path_a = -1;
  int path_b = -1;
  int row = -1;     // shared output entry
  int column = -1;  // global output column
};

/// Checks that the supports D^p of M_1(1^{e_1}) ... M_K(1^{e_K}) are pairwise
/// disjoint over distinct paths.
DisjointnessResult path_support_disjointness(const NetworkTopology& topo, const FactorMaps& fm);
DisjointnessResult path_support_disjointness(const NetworkTopology& topo);

struct KernelCharacterization {
  std::size_t expected_dim = 0;  // S^K - |I_S|
  std::size_t observed_dim = 0;
  std::size_t valid_indices = 0;
  double max_on_valid = 0.0;  // largest |basis entry| at a valid index
  bool indeterminate = false;
  bool pass = false;
};

/// Compares the numerical kernel of A_S against the tensors vanishing on I_S.
KernelCharacterization kernel_characterization_check(const LiftingOperator& A, const Support& S,
                                                     const NetworkTopology& topo);

}  // namespace liftcert
