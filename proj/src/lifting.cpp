#include "liftcert/lifting.hpp"

#include <cmath>
#include <map>

#include "liftcert/errors.hpp"

namespace liftcert {

LiftingOperator::LiftingOperator(int K, int S, Eigen::Index out_rows, Eigen::Index out_cols,
                                 Eigen::MatrixXd matrix)
    : K_(K), S_(S), out_rows_(out_rows), out_cols_(out_cols), matrix_(std::move(matrix)) {
  if (matrix_.rows() != out_rows * out_cols ||
      static_cast<std::size_t>(matrix_.cols()) != tensor_size(K, S)) {
    throw ShapeError("lifting matrix dimensions disagree with (K, S) and output shape");
  }
}

Eigen::Index LiftingOperator::column_of(const MultiIndex& i) const {
  if (static_cast<int>(i.size()) != K_) throw ShapeError("multi-index length differs from K");
  Eigen::Index col = 0;
  for (int k = 0; k < K_; ++k) {
    if (i[k] < 1 || i[k] > S_) throw std::out_of_range("multi-index entry outside {1..S}");
    col = col * S_ + (i[k] - 1);
  }
  return col;
}

MultiIndex LiftingOperator::index_of_column(Eigen::Index col) const {
  MultiIndex i(K_);
  for (int k = K_ - 1; k >= 0; --k) {
    i[k] = static_cast<int>(col % S_) + 1;
    col /= S_;
  }
  return i;
}

std::vector<Eigen::Index> LiftingOperator::cube_columns(const Support& S) const {
  if (S.K() != K_ || S.S() != S_) throw ShapeError("support shape differs from operator");
  std::vector<Eigen::Index> cols;
  Eigen::Index col = 0;
  for_each_multi_index(K_, S_, [&](const MultiIndex& i) {
    if (S.contains(i)) cols.push_back(col);
    ++col;
  });
  return cols;
}

Eigen::MatrixXd LiftingOperator::apply(const TensorK& T) const {
  if (T.K() != K_ || T.S() != S_) throw ShapeError("tensor shape differs from operator");
  Eigen::Map<const Eigen::VectorXd> t(T.data().data(), static_cast<Eigen::Index>(T.size()));
  Eigen::VectorXd y = matrix_ * t;
  return Eigen::Map<Eigen::MatrixXd>(y.data(), out_rows_, out_cols_);
}

LiftingOperator build_lifting(const FactorMaps& fm) {
  const int K = fm.K();
  const int S = fm.S();
  const Eigen::Index out_rows = fm.rows(0);
  const Eigen::Index out_cols = fm.cols(K - 1);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(out_rows * out_cols,
                                            static_cast<Eigen::Index>(tensor_size(K, S)));
  // Depth-first over prefixes i_1..i_k, sharing partial products; a zero
  // prefix leaves all of its columns zero.
  auto descend = [&](auto&& self, int k, const Eigen::MatrixXd& prefix, Eigen::Index col) -> void {
    for (int slot = 1; slot <= S; ++slot) {
      const Eigen::MatrixXd& sl = fm.slice(k, slot);
      Eigen::MatrixXd next = (k == 0) ? Eigen::MatrixXd(sl) : Eigen::MatrixXd(prefix * sl);
      if ((next.array() == 0.0).all()) continue;
      const Eigen::Index c = col * S + (slot - 1);
      if (k + 1 == K) {
        M.col(c) = flatten(next);
      } else {
        self(self, k + 1, next, c);
      }
    }
  };
  descend(descend, 0, Eigen::MatrixXd(), 0);
  return LiftingOperator(K, S, out_rows, out_cols, std::move(M));
}

LiftingOperator lift_restricted(const LiftingOperator& A, const Support& S) {
  if (S.K() != A.K() || S.S() != A.S()) throw ShapeError("support shape differs from operator");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(A.matrix().rows(), A.matrix().cols());
  for (Eigen::Index c : A.cube_columns(S)) M.col(c) = A.matrix().col(c);
  return LiftingOperator(A.K(), A.S(), A.output_rows(), A.output_cols(), std::move(M));
}

IdentifiabilityResult identifiability_test(const NetworkTopology& topo, const FactorMaps& fm,
                                           const SupportFamily& family) {
  if (family.K() != topo.K() || family.S() != topo.S()) {
    throw ShapeError("support family shape differs from topology");
  }
  const int N = topo.N();
  IdentifiabilityResult result;
  std::map<Support, bool> seen;
  for (std::size_t a = 0; a < family.size(); ++a) {
    for (std::size_t b = a; b < family.size(); ++b) {
      ++result.pairs_checked;
      Support u = support_union(family[a], family[b]);
      if (seen.count(u)) continue;
      seen.emplace(u, true);
      Eigen::MatrixXd X = fm.product(indicator_of_support(u));
      for (int f = 0; f < static_cast<int>(topo.leaves().size()); ++f) {
        for (int n = 0; n < N; ++n) {
          for (Eigen::Index r = 0; r < X.rows(); ++r) {
            const double v = X(r, f * N + n);
            if (std::abs(v) <= kBinaryEntryTol || std::abs(v - 1.0) <= kBinaryEntryTol) continue;
            result.pass = false;
            result.witness = BinaryWitness{a, b, f, static_cast<int>(r), n, v};
            return result;
          }
        }
      }
    }
  }
  return result;
}

IdentifiabilityResult identifiability_test(const NetworkTopology& topo, const SupportFamily& family) {
  return identifiability_test(topo, build_factor_maps(topo), family);
}

std::vector<MultiIndex> valid_index_set(const Support& S, const NetworkTopology& topo) {
  if (S.K() != topo.K() || S.S() != topo.S()) throw ShapeError("support shape differs from topology");
  std::vector<MultiIndex> out;
  for_each_multi_index(S.K(), S.S(), [&](const MultiIndex& i) {
    if (S.contains(i) && topo.path_of(i)) out.push_back(i);
  });
  return out;
}

DisjointnessResult path_support_disjointness(const NetworkTopology& topo, const FactorMaps& fm) {
  DisjointnessResult result;
  Eigen::MatrixXi owner;
  for (std::size_t pi = 0; pi < topo.paths().size(); ++pi) {
    const Path& p = topo.paths()[pi];
    ParamTuple ones(topo.K(), topo.S());
    for (int k = 0; k < topo.K(); ++k) {
      for (int slot : topo.slot_map().slots_of_edge(k, p.edges[k])) ones.factor(k)[slot - 1] = 1.0;
    }
    Eigen::MatrixXd D = fm.product(ones);
    if (owner.size() == 0) owner = Eigen::MatrixXi::Constant(D.rows(), D.cols(), -1);
    for (Eigen::Index c = 0; c < D.cols(); ++c) {
      for (Eigen::Index r = 0; r < D.rows(); ++r) {
        if (std::abs(D(r, c)) <= kBinaryEntryTol) continue;
        if (owner(r, c) >= 0) {
          result.pass = false;
          result.path_a = owner(r, c);
          result.path_b = static_cast<int>(pi);
          result.row = static_cast<int>(r);
          result.column = static_cast<int>(c);
          return result;
        }
        owner(r, c) = static_cast<int>(pi);
      }
    }
  }
  return result;
}

DisjointnessResult path_support_disjointness(const NetworkTopology& topo) {
  return path_support_disjointness(topo, build_factor_maps(topo));
}

KernelCharacterization kernel_characterization_check(const LiftingOperator& A, const Support& S,
                                                     const NetworkTopology& topo) {
  KernelCharacterization out;
  const auto valid = valid_index_set(S, topo);
  const auto cols = A.cube_columns(S);
  NullSpace ns = null_space(A.matrix(), cols);
  out.valid_indices = valid.size();
  out.expected_dim = tensor_size(A.K(), A.S()) - valid.size();
  out.observed_dim = static_cast<std::size_t>(ns.basis.cols());
  out.indeterminate = ns.summary.indeterminate;
  for (const auto& i : valid) {
    const Eigen::Index row = A.column_of(i);
    if (ns.basis.cols() > 0) {
      out.max_on_valid = std::max(out.max_on_valid, ns.basis.row(row).cwiseAbs().maxCoeff());
    }
  }
  out.pass = !out.indeterminate && out.expected_dim == out.observed_dim &&
             out.max_on_valid <= kKernelVanishTol;
  return out;
}

}  // namespace liftcert
