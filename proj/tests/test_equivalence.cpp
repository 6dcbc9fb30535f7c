#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "liftcert/equivalence.hpp"
#include "liftcert/errors.hpp"
#include "oracles.hpp"

using namespace liftcert;

namespace {

const NormOrder kOrders[] = {NormOrder(1.0), NormOrder(2.0), NormOrder::inf()};

ParamTuple rescale(ParamTuple h, const std::vector<double>& lam) {
  for (int k = 0; k < h.K(); ++k) {
    for (double& x : h.factor(k)) x *= lam[k];
  }
  return h;
}

}  // namespace

TEST(NormalizeDiag, Examples) {
  auto r = normalize_diag(ParamTuple({{2, 0}, {0.5, 0}}));
  EXPECT_EQ(r.tuple, ParamTuple({{1, 0}, {1, 0}}));
  EXPECT_DOUBLE_EQ(r.common_inf_norm, 1.0);

  const ParamTuple already({{1, -0.5}, {1, 0.25}});
  EXPECT_EQ(normalize_diag(already).tuple, already);

  r = normalize_diag(ParamTuple({{1, 0}, {-3, 0}}));
  EXPECT_NEAR(r.tuple.factor(0)[0], -std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r.tuple.factor(1)[0], std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(r.common_inf_norm, std::sqrt(3.0), 1e-15);
}

TEST(NormalizeDiag, EqualNormsAndSameProduct) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const ParamTuple h = oracle::random_tuple(3, 4, rng, -5, 5);
    const auto r = normalize_diag(h);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(oracle::inf_norm(r.tuple.factor(k)), r.common_inf_norm, 1e-12);
    }
    const TensorK a = segre(h), b = segre(r.tuple);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12 * (1 + std::abs(a[i])));
  }
}

TEST(NormalizeDiag, RejectsZeroFactor) {
  EXPECT_THROW(normalize_diag(ParamTuple({{1, 0}, {0, 0}})), ZeroFactorError);
}

TEST(DpDist, Examples) {
  const ParamTuple a({{2, 0}, {1, 0}}), b({{1, 0}, {2, 0}});
  EXPECT_NEAR(dp_dist(a, b, NormOrder(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(dp_dist(ParamTuple({{1, 0}, {1, 0}}), ParamTuple({{-1, 0}, {-1, 0}}), NormOrder(1.0)),
              0.0, 1e-15);
  EXPECT_DOUBLE_EQ(dp_dist(ParamTuple({{1, 0}, {1, 0}}), ParamTuple({{2, 0}, {2, 0}}),
                           NormOrder::inf()),
                   1.0);
}

TEST(DpDist, MatchesBruteForceOverAllSignPairs) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 300; ++trial) {
    const int K = 1 + trial % 4;
    const ParamTuple h = oracle::random_tuple(K, 3, rng), g = oracle::random_tuple(K, 3, rng);
    for (NormOrder p : kOrders) {
      EXPECT_NEAR(dp_dist(h, g, p), oracle::dp_bruteforce(h, g, p), 1e-12);
    }
  }
}

TEST(DpDist, NeverBeatenBySampledRepresentatives) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const int K = 2 + trial % 3;
    const ParamTuple h = oracle::random_tuple(K, 3, rng), g = oracle::random_tuple(K, 3, rng);
    const NormOrder p = kOrders[trial % 3];
    const double enumerated = dp_dist(h, g, p);
    const double sampled = oracle::dp_sampled(h, g, p, 2000, rng);
    EXPECT_LE(enumerated, sampled * (1 + 1e-12) + 1e-14);
  }
}

TEST(DpDist, MetricAxiomsAndInvariance) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> lam(0.1, 10.0);
  for (int trial = 0; trial < 100; ++trial) {
    const ParamTuple h = oracle::random_tuple(3, 3, rng), g = oracle::random_tuple(3, 3, rng),
                     f = oracle::random_tuple(3, 3, rng);
    for (NormOrder p : kOrders) {
      const double hg = dp_dist(h, g, p);
      EXPECT_NEAR(hg, dp_dist(g, h, p), 1e-12);
      EXPECT_LE(hg, dp_dist(h, f, p) + dp_dist(f, g, p) + 1e-12);
      const double a = lam(rng), b = -lam(rng);
      EXPECT_NEAR(dp_dist(rescale(h, {a, b, 1 / (a * b)}), g, p), hg, 1e-10);
      EXPECT_TRUE(same_class(h, rescale(h, {a, b, 1 / (a * b)}), p));
    }
  }
}

TEST(DpDist, RejectsZeroFactor) {
  EXPECT_THROW(dp_dist(ParamTuple({{1, 0}, {0, 0}}), ParamTuple({{1, 0}, {1, 0}}), NormOrder(2.0)),
               ZeroFactorError);
}

TEST(QuotientFromTensorBound, EqualTuplesAndGateSemantics) {
  const ParamTuple h({{1, 2}, {3, -1}});
  const auto r = theorem1_check(h, h, NormOrder(2.0), NormOrder(2.0));
  EXPECT_TRUE(r.precondition_met);
  EXPECT_TRUE(r.satisfied);
  EXPECT_EQ(r.lhs, 0.0);

  const auto far = theorem1_check(ParamTuple({{1, 0}, {1, 0}}), ParamTuple({{0, 1}, {0, 1}}),
                                  NormOrder(2.0), NormOrder(2.0));
  EXPECT_FALSE(far.precondition_met);
  EXPECT_FALSE(far.satisfied);
  EXPECT_FALSE(far.violated());
}

TEST(QuotientFromTensorBound, HoldsOnRandomPreconditionPairs) {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> scale(1e-4, 0.3);
  int met = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const int K = 1 + trial % 3;
    const ParamTuple h = oracle::random_tuple(K, 4, rng);
    ParamTuple g = h;
    const ParamTuple e = oracle::random_tuple(K, 4, rng);
    const double s = scale(rng);
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < 4; ++j) g.factor(k)[j] += s * e.factor(k)[j];
    }
    for (NormOrder p : kOrders) {
      for (NormOrder q : kOrders) {
        const auto r = theorem1_check(h, g, p, q);
        if (!r.precondition_met) continue;
        ++met;
        EXPECT_TRUE(r.satisfied) << r.lhs << " > " << r.rhs;
      }
    }
  }
  EXPECT_GT(met, 3000);
}

TEST(TensorFromQuotientBound, HoldsAndCollapsesForSingleFactor) {
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 300; ++trial) {
    const int K = 1 + trial % 3;
    const ParamTuple h = oracle::random_tuple(K, 3, rng), g = oracle::random_tuple(K, 3, rng);
    for (NormOrder q : kOrders) {
      const auto r = theorem2_check(h, g, q);
      EXPECT_TRUE(r.precondition_met);
      EXPECT_TRUE(r.satisfied) << r.lhs << " > " << r.rhs;
      if (K == 1) {
        EXPECT_NEAR(r.lhs, r.rhs, 1e-12);
      }
    }
  }
}

TEST(NetworkDist, SinglePathEqualsDp) {
  const NetworkTopology topo = single_path_topology(4, {{0, 1}, {0, 2}});
  std::mt19937_64 rng(27);
  const ParamTuple h = oracle::random_tuple(2, 2, rng), g = oracle::random_tuple(2, 2, rng);
  EXPECT_NEAR(network_dist(h, g, NormOrder(2.0), topo), dp_dist(h, g, NormOrder(2.0)), 1e-14);
  EXPECT_EQ(network_dist(h, h, NormOrder(2.0), topo), 0.0);
}

NetworkTopology two_chains() {
  RawTopology raw;
  raw.N = 4;
  raw.nodes = {"r", "a1", "b1", "a2", "b2"};
  raw.root = "r";
  raw.leaves = {"a2", "b2"};
  raw.edges = {{"a1", "r", {0}}, {"b1", "r", {1}}, {"a2", "a1", {0}}, {"b2", "b1", {2}}};
  return validate_topology(raw);
}

TEST(NetworkDist, PerPathRescalingIsInvisible) {
  const NetworkTopology topo = two_chains();
  ASSERT_EQ(topo.paths().size(), 2u);
  const ParamTuple h({{0.7, -1.2}, {0.4, 2.0}});
  // Slot 1 of each layer feeds the a-chain only.
  const ParamTuple g({{0.7 * 5.0, -1.2}, {0.4 / 5.0, 2.0}});
  for (NormOrder p : kOrders) EXPECT_NEAR(network_dist(h, g, p, topo), 0.0, 1e-15);
}

TEST(NetworkDist, OnePathDifferenceEqualsItsDp) {
  const NetworkTopology topo = two_chains();
  const ParamTuple h({{0.7, -1.2}, {0.4, 2.0}});
  const ParamTuple g({{0.7, -0.3}, {0.4, 1.1}});
  for (NormOrder p : kOrders) {
    double single = 0.0;
    for (const Path& path : topo.paths().paths()) {
      single += dp_dist(path_restriction(h, topo, path), path_restriction(g, topo, path), p);
    }
    EXPECT_GT(single, 0.0);
    EXPECT_NEAR(network_dist(h, g, p, topo), single, 1e-14);
  }
}

TEST(NetworkDist, RejectsZeroPathFactor) {
  const NetworkTopology topo = single_path_topology(4, {{0, 1}, {0, 2}});
  EXPECT_THROW(network_dist(ParamTuple({{1, 0}, {0, 0}}), ParamTuple({{1, 0}, {1, 0}}),
                            NormOrder(2.0), topo),
               ZeroFactorError);
}
