#pragma once

// Order-K tensors over {1..S}^K, the Segre embedding, and per-layer supports.
//
// Multi-indices and slot indices are 1-based throughout the public API.
// Tensor storage is dense and row-major: the first axis varies slowest.

#include <cstddef>
#include <span>
#include <vector>

#include "liftcert/norm_order.hpp"

namespace liftcert {

using MultiIndex = std::vector<int>;

/// Entrywise l^p norm of a vector.
double vector_norm(std::span<const double> v, NormOrder p);

/// Factor parameters h = (h_1, ..., h_K), each a vector of S reals.
class ParamTuple {
 public:
  ParamTuple() = default;
  /// All-zero tuple.
  ParamTuple(int K, int S);
  /// Throws ShapeError on ragged or empty input, std::invalid_argument on
  /// non-finite entries.
  explicit ParamTuple(std::vector<std::vector<double>> factors);

  int K() const { return static_cast<int>(factors_.size()); }
  int S() const { return S_; }

  /// 0-based layer access.
  std::span<const double> factor(int k) const { return factors_.at(k); }
  std::span<double> factor(int k) { return factors_.at(k); }
  const std::vector<std::vector<double>>& factors() const { return factors_; }

  /// True iff every factor has a nonzero entry (membership in h_S*).
  bool nonzero_class() const;
  /// 0-based index of the first all-zero factor, or -1.
  int first_zero_factor() const;

  /// Entrywise l^p norm of the concatenated factors.
  double norm(NormOrder p) const;

  friend bool operator==(const ParamTuple&, const ParamTuple&) = default;

 private:
  int S_ = 0;
  std::vector<std::vector<double>> factors_;
};

ParamTuple operator-(const ParamTuple& a, const ParamTuple& b);

/// Per-layer slot subsets S = (S_1, ..., S_K), slots 1-based.
class Support {
 public:
  Support() = default;
  /// Sorts and deduplicates each layer; throws std::out_of_range if a slot is
  /// outside {1..S}.
  Support(int S, std::vector<std::vector<int>> per_layer);

  static Support full(int K, int S);

  int K() const { return static_cast<int>(layers_.size()); }
  int S() const { return S_; }
  const std::vector<int>& layer(int k) const { return layers_.at(k); }
  const std::vector<std::vector<int>>& layers() const { return layers_; }

  bool contains(int k, int slot) const;
  /// True iff i_k is in S_k for every k.
  bool contains(const MultiIndex& i) const;
  bool any_layer_empty() const;
  /// Number of multi-indices in the S-cube.
  std::size_t cube_size() const;

  friend bool operator==(const Support&, const Support&) = default;
  friend auto operator<=>(const Support&, const Support&) = default;

 private:
  int S_ = 0;
  std::vector<std::vector<int>> layers_;
};

/// Nonempty list of distinct supports sharing (K, S).
class SupportFamily {
 public:
  explicit SupportFamily(std::vector<Support> members);

  /// Every support whose layers each hold between 1 and max_size slots.
  /// Throws std::length_error if the family would exceed `cap` members.
  static SupportFamily all_of_size_at_most(int K, int S, int max_size,
                                           std::size_t cap = kDefaultCap);

  static constexpr std::size_t kDefaultCap = 10000;

  int K() const { return members_.front().K(); }
  int S() const { return members_.front().S(); }
  std::size_t size() const { return members_.size(); }
  const Support& operator[](std::size_t i) const { return members_.at(i); }
  const std::vector<Support>& members() const { return members_; }

 private:
  std::vector<Support> members_;
};

/// Dense real tensor of order K with all axes of size S.
class TensorK {
 public:
  TensorK() = default;
  /// Zero tensor; throws std::length_error when S^K exceeds kMaxEntries.
  TensorK(int K, int S);
  TensorK(int K, int S, std::vector<double> entries);

  static constexpr std::size_t kMaxEntries = std::size_t{1} << 24;

  int K() const { return K_; }
  int S() const { return S_; }
  std::size_t size() const { return data_.size(); }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }
  double& at(const MultiIndex& i) { return data_.at(flat_index(i)); }
  double at(const MultiIndex& i) const { return data_.at(flat_index(i)); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  /// Row-major offset of a 1-based multi-index.
  std::size_t flat_index(const MultiIndex& i) const;
  /// Inverse of flat_index.
  MultiIndex multi_index(std::size_t flat) const;

  friend bool operator==(const TensorK&, const TensorK&) = default;

 private:
  int K_ = 0;
  int S_ = 0;
  std::vector<double> data_;
};

TensorK operator-(const TensorK& a, const TensorK& b);
TensorK operator+(const TensorK& a, const TensorK& b);
double dot(const TensorK& a, const TensorK& b);

/// S^K, throwing std::length_error past TensorK::kMaxEntries.
std::size_t tensor_size(int K, int S);

/// Calls fn(i) for every multi-index of {1..S}^K in row-major order.
template <typename Fn>
void for_each_multi_index(int K, int S, Fn&& fn) {
  if (K <= 0 || S <= 0) return;
  MultiIndex i(K, 1);
  while (true) {
    fn(static_cast<const MultiIndex&>(i));
    int k = K - 1;
    while (k >= 0 && i[k] == S) {
      i[k] = 1;
      --k;
    }
    if (k < 0) return;
    ++i[k];
  }
}

/// Segre embedding: T_i = h_{1,i_1} * ... * h_{K,i_K}.
TensorK segre(const ParamTuple& h);

/// Keeps entries whose multi-index lies in the S-cube, zeroes the rest.
TensorK project_support(const TensorK& T, const Support& S);

/// Entrywise l^q norm of the flattened tensor.
double tensor_norm(const TensorK& T, NormOrder q);

/// Layerwise union of two supports.
Support support_union(const Support& a, const Support& b);

/// Tuple whose k-th factor is the standard basis vector at i_k.
ParamTuple indicator_tuple(const MultiIndex& i, int S);

/// Tuple of ones on the slots of S and zeros elsewhere.
ParamTuple indicator_of_support(const Support& S);

/// Zeroes every slot outside S; supp(result) is contained in S.
ParamTuple restrict_to_support(const ParamTuple& h, const Support& S);

}  // namespace liftcert
