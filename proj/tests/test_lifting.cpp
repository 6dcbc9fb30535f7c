#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "liftcert/lifting.hpp"
#include "oracles.hpp"

using namespace liftcert;

namespace {

NetworkTopology diamond(int shift_a, int shift_b) {
  RawTopology raw;
  raw.N = 4;
  raw.nodes = {"r", "a", "b", "c"};
  raw.root = "r";
  raw.leaves = {"c"};
  raw.edges = {{"a", "r", {0}}, {"b", "r", {1}}, {"c", "a", {shift_a}}, {"c", "b", {shift_b}}};
  return validate_topology(raw);
}

}  // namespace

TEST(Lifting, SingleLayerIsTheFactorMapItself) {
  const NetworkTopology t = haar_topology(1, 4);
  const FactorMaps fm = build_factor_maps(t);
  const LiftingOperator A = build_lifting(fm);
  ASSERT_EQ(A.matrix().cols(), 4);
  for (int slot = 1; slot <= 4; ++slot) {
    EXPECT_EQ(A.matrix().col(slot - 1), flatten(fm.slice(0, slot)));
  }
}

TEST(Lifting, ChainColumnsAreOrthogonalShifts) {
  const NetworkTopology t = single_path_topology(4, {{0, 1}, {0, 2}});
  const LiftingOperator A = build_lifting(build_factor_maps(t));
  ASSERT_EQ(A.matrix().rows(), 16);
  ASSERT_EQ(A.matrix().cols(), 4);
  const Eigen::MatrixXd G = A.matrix().transpose() * A.matrix();
  EXPECT_EQ(G, 4.0 * Eigen::MatrixXd::Identity(4, 4));
  for (Eigen::Index i = 0; i < A.matrix().size(); ++i) {
    const double x = A.matrix().data()[i];
    EXPECT_TRUE(x == 0.0 || x == 1.0);
  }
}

TEST(Lifting, LiftOfSegreIsTheProduct) {
  std::mt19937_64 rng(41);
  const NetworkTopology tops[] = {haar_topology(2, 8), single_path_topology(8, {{0, 3}, {1, 2}, {0, 4}})};
  for (const auto& t : tops) {
    const FactorMaps fm = build_factor_maps(t);
    const LiftingOperator A = build_lifting(fm);
    for (int trial = 0; trial < 10; ++trial) {
      const ParamTuple h = oracle::random_tuple(t.K(), t.S(), rng);
      const Eigen::MatrixXd P = oracle::product_by_application(t, h);
      EXPECT_LE((A.apply(segre(h)) - P).norm(), 1e-12 * (1 + P.norm()));
    }
  }
}

TEST(Lifting, RestrictionZeroesOutsideCube) {
  const NetworkTopology t = haar_topology(2, 8);
  const LiftingOperator A = build_lifting(build_factor_maps(t));
  const Support S(8, {{1, 2}, {1, 3}});
  const LiftingOperator AS = lift_restricted(A, S);
  const auto cube = A.cube_columns(S);
  ASSERT_EQ(cube.size(), 4u);
  for (Eigen::Index c = 0; c < A.matrix().cols(); ++c) {
    const bool in = std::find(cube.begin(), cube.end(), c) != cube.end();
    if (in) {
      EXPECT_EQ(AS.matrix().col(c), A.matrix().col(c));
    } else {
      EXPECT_EQ(AS.matrix().col(c).norm(), 0.0);
    }
  }
  EXPECT_EQ(A.column_of(A.index_of_column(17)), 17);
}

TEST(Identifiability, HaarPasses) {
  const NetworkTopology t = haar_topology(2, 8);
  const auto r = identifiability_test(t, SupportFamily({Support::full(2, 8)}));
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.pairs_checked, 1u);
}

TEST(Identifiability, RepeatedShiftFailsWithWitnessTwo) {
  const NetworkTopology t = single_path_topology(4, {{0, 1}, {0, 1}});
  const auto r = identifiability_test(t, SupportFamily({Support::full(2, 2)}));
  EXPECT_FALSE(r.pass);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_NEAR(r.witness->value, 2.0, 1e-12);
  // Shift 1 is reached twice: column 0 row 1.
  EXPECT_EQ(r.witness->row, 1);
  EXPECT_EQ(r.witness->column, 0);
}

TEST(Identifiability, PairUnionCanFailWhereMembersPass) {
  const NetworkTopology t = single_path_topology(4, {{0, 1}, {0, 1}});
  const SupportFamily fam({Support(2, {{1}, {1, 2}}), Support(2, {{1, 2}, {1}})});
  const auto r = identifiability_test(t, fam);
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.witness->member_a, 0u);
  EXPECT_EQ(r.witness->member_b, 1u);
}

TEST(ValidIndexSet, FollowsPaths) {
  const NetworkTopology t1 = haar_topology(1, 4);
  EXPECT_EQ(valid_index_set(Support::full(1, 4), t1).size(), 4u);
  const NetworkTopology t2 = haar_topology(2, 8);
  EXPECT_EQ(valid_index_set(Support::full(2, 8), t2).size(), 16u);
  const auto I = valid_index_set(Support(8, {{1, 3}, {1, 2}}), t2);
  EXPECT_EQ(I, (std::vector<MultiIndex>{{1, 1}, {1, 2}}));
}

TEST(Disjointness, TreePassesDiamondWithEqualShiftsFails) {
  EXPECT_TRUE(path_support_disjointness(haar_topology(3, 16)).pass);
  EXPECT_TRUE(path_support_disjointness(diamond(0, 0)).pass);  // shifts 0 and 1
  const auto r = path_support_disjointness(diamond(1, 0));     // both shift 1
  EXPECT_FALSE(r.pass);
  EXPECT_EQ(r.path_a, 0);
  EXPECT_EQ(r.path_b, 1);
}

TEST(KernelCharacterization, TrivialKernelForChain) {
  const NetworkTopology t = single_path_topology(4, {{0, 1}, {0, 2}});
  const LiftingOperator A = build_lifting(build_factor_maps(t));
  const auto k = kernel_characterization_check(A, Support::full(2, 2), t);
  EXPECT_TRUE(k.pass);
  EXPECT_EQ(k.expected_dim, 0u);
  EXPECT_EQ(k.observed_dim, 0u);
}

TEST(KernelCharacterization, InvalidIndicesSpanTheKernel) {
  const NetworkTopology t = haar_topology(2, 8);
  const LiftingOperator A = build_lifting(build_factor_maps(t));
  const auto small = kernel_characterization_check(A, Support(8, {{1, 3}, {1, 2}}), t);
  EXPECT_TRUE(small.pass);
  // 60 directions outside the cube plus 2 invalid cube indices.
  EXPECT_EQ(small.expected_dim, 62u);
  EXPECT_EQ(small.observed_dim, 62u);
  EXPECT_LE(small.max_on_valid, kKernelVanishTol);

  const auto full = kernel_characterization_check(A, Support::full(2, 8), t);
  EXPECT_TRUE(full.pass);
  EXPECT_EQ(full.expected_dim, 48u);

  const NetworkTopology t1 = haar_topology(1, 4);
  const auto k1 =
      kernel_characterization_check(build_lifting(build_factor_maps(t1)), Support::full(1, 4), t1);
  EXPECT_TRUE(k1.pass);
  EXPECT_EQ(k1.expected_dim, 0u);
}

TEST(KernelCharacterization, FailsWhenPathsCollide) {
  const NetworkTopology t = single_path_topology(4, {{0, 1}, {0, 1}});
  const LiftingOperator A = build_lifting(build_factor_maps(t));
  const auto k = kernel_characterization_check(A, Support::full(2, 2), t);
  EXPECT_FALSE(k.pass);
  EXPECT_EQ(k.expected_dim, 0u);
  EXPECT_EQ(k.observed_dim, 1u);
}
