#include "liftcert/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <iterator>
#include <cmath>
#include <stdexcept>
#include <string>

#include "liftcert/errors.hpp"

namespace liftcert {

double vector_norm(std::span<const double> v, NormOrder p) {
  if (p.is_inf()) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  if (p.value() == 1.0) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  // Scale by the max entry to avoid overflow in |x|^q.
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  if (p.value() == 2.0) {
    for (double x : v) s += (x / m) * (x / m);
    return m * std::sqrt(s);
  }
  for (double x : v) s += std::pow(std::abs(x) / m, p.value());
  return m * std::pow(s, 1.0 / p.value());
}

namespace {

void require_same_shape(const TensorK& a, const TensorK& b) {
  if (a.K() != b.K() || a.S() != b.S()) {
    throw ShapeError("tensor shapes differ: (" + std::to_string(a.K()) + "," +
                     std::to_string(a.S()) + ") vs (" + std::to_string(b.K()) + "," +
                     std::to_string(b.S()) + ")");
  }
}

}  // namespace

// ---------------------------------------------------------------- ParamTuple

ParamTuple::ParamTuple(int K, int S) : S_(S) {
  if (K < 1 || S < 1) throw ShapeError("ParamTuple needs K >= 1 and S >= 1");
  factors_.assign(K, std::vector<double>(S, 0.0));
}

ParamTuple::ParamTuple(std::vector<std::vector<double>> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw ShapeError("ParamTuple needs at least one factor");
  S_ = static_cast<int>(factors_.front().size());
  if (S_ < 1) throw ShapeError("ParamTuple factors must be nonempty");
  for (const auto& f : factors_) {
    if (static_cast<int>(f.size()) != S_) throw ShapeError("ParamTuple factors are ragged");
    for (double x : f) {
      if (!std::isfinite(x)) throw std::invalid_argument("ParamTuple entries must be finite");
    }
  }
}

bool ParamTuple::nonzero_class() const { return first_zero_factor() < 0; }

int ParamTuple::first_zero_factor() const {
  for (int k = 0; k < K(); ++k) {
    const auto& f = factors_[k];
    if (std::all_of(f.begin(), f.end(), [](double x) { return x == 0.0; })) return k;
  }
  return -1;
}

double ParamTuple::norm(NormOrder p) const {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(K()) * S_);
  for (const auto& f : factors_) flat.insert(flat.end(), f.begin(), f.end());
  return vector_norm(flat, p);
}

ParamTuple operator-(const ParamTuple& a, const ParamTuple& b) {
  if (a.K() != b.K() || a.S() != b.S()) throw ShapeError("ParamTuple shapes differ");
  ParamTuple out = a;
  for (int k = 0; k < a.K(); ++k) {
    auto dst = out.factor(k);
    auto src = b.factor(k);
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] -= src[j];
  }
  return out;
}

// ------------------------------------------------------------------- Support

Support::Support(int S, std::vector<std::vector<int>> per_layer)
    : S_(S), layers_(std::move(per_layer)) {
  if (S < 1 || layers_.empty()) throw ShapeError("Support needs K >= 1 and S >= 1");
  for (auto& layer : layers_) {
    std::sort(layer.begin(), layer.end());
    layer.erase(std::unique(layer.begin(), layer.end()), layer.end());
    if (!layer.empty() && (layer.front() < 1 || layer.back() > S)) {
      throw std::out_of_range("support slot outside {1.." + std::to_string(S) + "}");
    }
  }
}

Support Support::full(int K, int S) {
  std::vector<int> all(S);
  for (int j = 0; j < S; ++j) all[j] = j + 1;
  return Support(S, std::vector<std::vector<int>>(K, all));
}

bool Support::contains(int k, int slot) const {
  const auto& l = layers_.at(k);
  return std::binary_search(l.begin(), l.end(), slot);
}

bool Support::contains(const MultiIndex& i) const {
  if (static_cast<int>(i.size()) != K()) throw ShapeError("multi-index length differs from K");
  for (int k = 0; k < K(); ++k) {
    if (!contains(k, i[k])) return false;
  }
  return true;
}

bool Support::any_layer_empty() const {
  return std::any_of(layers_.begin(), layers_.end(), [](const auto& l) { return l.empty(); });
}

std::size_t Support::cube_size() const {
  std::size_t n = 1;
  for (const auto& l : layers_) n *= l.size();
  return n;
}

// ------------------------------------------------------------- SupportFamily

SupportFamily::SupportFamily(std::vector<Support> members) : members_(std::move(members)) {
  if (members_.empty()) throw std::invalid_argument("support family must be nonempty");
  const int K = members_.front().K();
  const int S = members_.front().S();
  for (std::size_t a = 0; a < members_.size(); ++a) {
    if (members_[a].K() != K || members_[a].S() != S) {
      throw ShapeError("support family members disagree on (K, S)");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (members_[a] == members_[b]) {
        throw std::invalid_argument("support family has duplicate member " + std::to_string(a));
      }
    }
  }
}

SupportFamily SupportFamily::all_of_size_at_most(int K, int S, int max_size, std::size_t cap) {
  if (K < 1 || S < 1 || max_size < 1) {
    throw std::invalid_argument("support generator needs K, S, max size >= 1");
  }
  // Nonempty subsets of {1..S} with at most max_size elements, by bitmask.
  if (S > 30) throw std::length_error("support generator limited to S <= 30");
  std::vector<std::vector<int>> subsets;
  for (std::uint32_t mask = 1; mask < (std::uint32_t{1} << S); ++mask) {
    if (std::popcount(mask) > max_size) continue;
    std::vector<int> s;
    for (int j = 0; j < S; ++j) {
      if (mask & (std::uint32_t{1} << j)) s.push_back(j + 1);
    }
    subsets.push_back(std::move(s));
    if (subsets.size() > cap) break;
  }
  std::sort(subsets.begin(), subsets.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  double count = std::pow(static_cast<double>(subsets.size()), K);
  if (count > static_cast<double>(cap)) {
    throw std::length_error("generated support family would have " +
                            std::to_string(static_cast<long long>(count)) +
                            " members, above the cap of " + std::to_string(cap));
  }
  std::vector<Support> members;
  std::vector<std::size_t> pick(K, 0);
  while (true) {
    std::vector<std::vector<int>> layers(K);
    for (int k = 0; k < K; ++k) layers[k] = subsets[pick[k]];
    members.emplace_back(S, std::move(layers));
    int k = K - 1;
    while (k >= 0 && pick[k] + 1 == subsets.size()) {
      pick[k] = 0;
      --k;
    }
    if (k < 0) break;
    ++pick[k];
  }
  return SupportFamily(std::move(members));
}

// ------------------------------------------------------------------- TensorK

std::size_t tensor_size(int K, int S) {
  if (K < 1 || S < 1) throw ShapeError("tensor needs K >= 1 and S >= 1");
  std::size_t n = 1;
  for (int k = 0; k < K; ++k) {
    n *= static_cast<std::size_t>(S);
    if (n > TensorK::kMaxEntries) throw std::length_error("S^K exceeds the dense tensor limit");
  }
  return n;
}

TensorK::TensorK(int K, int S) : K_(K), S_(S), data_(tensor_size(K, S), 0.0) {}

TensorK::TensorK(int K, int S, std::vector<double> entries)
    : K_(K), S_(S), data_(std::move(entries)) {
  if (data_.size() != tensor_size(K, S)) throw ShapeError("tensor entry count is not S^K");
  for (double x : data_) {
    if (!std::isfinite(x)) throw std::invalid_argument("tensor entries must be finite");
  }
}

std::size_t TensorK::flat_index(const MultiIndex& i) const {
  if (static_cast<int>(i.size()) != K_) throw ShapeError("multi-index length differs from K");
  std::size_t flat = 0;
  for (int k = 0; k < K_; ++k) {
    if (i[k] < 1 || i[k] > S_) throw std::out_of_range("multi-index entry outside {1..S}");
    flat = flat * S_ + static_cast<std::size_t>(i[k] - 1);
  }
  return flat;
}

MultiIndex TensorK::multi_index(std::size_t flat) const {
  MultiIndex i(K_);
  for (int k = K_ - 1; k >= 0; --k) {
    i[k] = static_cast<int>(flat % S_) + 1;
    flat /= S_;
  }
  return i;
}

TensorK operator-(const TensorK& a, const TensorK& b) {
  require_same_shape(a, b);
  TensorK out = a;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] -= b[j];
  return out;
}

TensorK operator+(const TensorK& a, const TensorK& b) {
  require_same_shape(a, b);
  TensorK out = a;
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += b[j];
  return out;
}

double dot(const TensorK& a, const TensorK& b) {
  require_same_shape(a, b);
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

// ---------------------------------------------------------------- operations

TensorK segre(const ParamTuple& h) {
  const int K = h.K();
  const int S = h.S();
  TensorK T(K, S);
  // Build row-major by successive outer products.
  std::vector<double> cur(h.factor(0).begin(), h.factor(0).end());
  for (int k = 1; k < K; ++k) {
    auto f = h.factor(k);
    std::vector<double> next;
    next.reserve(cur.size() * S);
    for (double a : cur) {
      for (double b : f) next.push_back(a * b);
    }
    cur = std::move(next);
  }
  std::copy(cur.begin(), cur.end(), T.data().begin());
  return T;
}

TensorK project_support(const TensorK& T, const Support& S) {
  if (T.K() != S.K() || T.S() != S.S()) throw ShapeError("support shape differs from tensor");
  TensorK out(T.K(), T.S());
  std::size_t flat = 0;
  for_each_multi_index(T.K(), T.S(), [&](const MultiIndex& i) {
    if (S.contains(i)) out[flat] = T[flat];
    ++flat;
  });
  return out;
}

double tensor_norm(const TensorK& T, NormOrder q) { return vector_norm(T.data(), q); }

Support support_union(const Support& a, const Support& b) {
  if (a.K() != b.K() || a.S() != b.S()) throw ShapeError("support shapes differ");
  std::vector<std::vector<int>> layers(a.K());
  for (int k = 0; k < a.K(); ++k) {
    std::set_union(a.layer(k).begin(), a.layer(k).end(), b.layer(k).begin(), b.layer(k).end(),
                   std::back_inserter(layers[k]));
  }
  return Support(a.S(), std::move(layers));
}

ParamTuple indicator_tuple(const MultiIndex& i, int S) {
  ParamTuple h(static_cast<int>(i.size()), S);
  for (int k = 0; k < h.K(); ++k) {
    if (i[k] < 1 || i[k] > S) throw std::out_of_range("indicator index outside {1..S}");
    h.factor(k)[i[k] - 1] = 1.0;
  }
  return h;
}

ParamTuple indicator_of_support(const Support& S) {
  ParamTuple h(S.K(), S.S());
  for (int k = 0; k < S.K(); ++k) {
    for (int slot : S.layer(k)) h.factor(k)[slot - 1] = 1.0;
  }
  return h;
}

ParamTuple restrict_to_support(const ParamTuple& h, const Support& S) {
  if (h.K() != S.K() || h.S() != S.S()) throw ShapeError("support shape differs from tuple");
  ParamTuple out = h;
  for (int k = 0; k < h.K(); ++k) {
    for (int j = 1; j <= h.S(); ++j) {
      if (!S.contains(k, j)) out.factor(k)[j - 1] = 0.0;
    }
  }
  return out;
}

}  // namespace liftcert
