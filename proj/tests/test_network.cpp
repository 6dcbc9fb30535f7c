#include <random>
#include <string>

#include <gtest/gtest.h>

#include "liftcert/errors.hpp"
#include "liftcert/network.hpp"
#include "oracles.hpp"

using namespace liftcert;

namespace {

std::string topology_error(const RawTopology& raw) {
  try {
    validate_topology(raw);
  } catch (const TopologyError& e) {
    return e.what();
  }
  return "";
}

RawTopology chain(int N, std::vector<std::vector<int>> supports) {
  RawTopology raw;
  raw.N = N;
  raw.root = "r";
  raw.nodes = {"r"};
  for (std::size_t d = 1; d <= supports.size(); ++d) raw.nodes.push_back("n" + std::to_string(d));
  raw.leaves = {raw.nodes.back()};
  for (std::size_t d = 1; d <= supports.size(); ++d) {
    raw.edges.push_back({raw.nodes[d], raw.nodes[d - 1], supports[d - 1]});
  }
  return raw;
}

using Factors = std::vector<std::vector<double>>;

ParamTuple ones(int K, int S) { return ParamTuple(Factors(K, std::vector<double>(S, 1.0))); }

}  // namespace

TEST(ValidateTopology, RejectsMalformedGraphs) {
  RawTopology cyc;
  cyc.N = 4;
  cyc.nodes = {"r", "a", "b", "c"};
  cyc.root = "r";
  cyc.leaves = {"c"};
  cyc.edges = {{"a", "r", {0}}, {"b", "a", {0}}, {"a", "b", {0}}, {"c", "b", {0}}};
  EXPECT_NE(topology_error(cyc).find("cycle"), std::string::npos);

  RawTopology amb;
  amb.N = 4;
  amb.nodes = {"r", "a", "b"};
  amb.root = "r";
  amb.leaves = {"b"};
  amb.edges = {{"a", "r", {0}}, {"b", "a", {0}}, {"b", "r", {1}}};
  EXPECT_NE(topology_error(amb).find("ambiguous depth"), std::string::npos);

  RawTopology uneven;
  uneven.N = 4;
  uneven.nodes = {"r", "a", "b", "c"};
  uneven.root = "r";
  uneven.leaves = {"b", "c"};
  uneven.edges = {{"a", "r", {0}}, {"b", "a", {0}}, {"c", "r", {1}}};
  EXPECT_NE(topology_error(uneven).find("unequal path lengths"), std::string::npos);

  EXPECT_NE(topology_error(chain(4, {{0, 1}, {0}})).find("inconsistent slot totals"),
            std::string::npos);
  EXPECT_NE(topology_error(chain(4, {{0, 4}})).find("out of range"), std::string::npos);
  EXPECT_NE(topology_error(chain(4, {{}})).find("empty kernel support"), std::string::npos);
  EXPECT_NE(topology_error(chain(4, {{1, 1}})).find("repeats"), std::string::npos);

  RawTopology padded = chain(4, {{0, 1}, {0}});
  padded.S = 1;
  EXPECT_NE(topology_error(padded).find("smaller"), std::string::npos);
  padded.S = 2;
  EXPECT_EQ(topology_error(padded), "");
}

TEST(ValidateTopology, DepthsSlotsAndPaths) {
  const NetworkTopology t = haar_topology(2, 8);
  EXPECT_EQ(t.K(), 2);
  EXPECT_EQ(t.S(), 8);
  EXPECT_EQ(t.layer_slot_count(1), 4);
  EXPECT_EQ(t.layer_slot_count(2), 8);
  EXPECT_EQ(t.paths().size(), 4u);
  for (int f = 0; f < 4; ++f) EXPECT_EQ(t.paths().by_leaf(f).size(), 1u);
  // Layer 1 slots 5..8 are inactive padding.
  for (int slot = 5; slot <= 8; ++slot) EXPECT_FALSE(t.slot_map().at(0, slot).has_value());
  EXPECT_TRUE(t.path_of({1, 1}).has_value());
  EXPECT_FALSE(t.path_of({1, 5}).has_value());  // leaf n2_2 does not feed n1_0
  EXPECT_FALSE(t.path_of({5, 1}).has_value());
  EXPECT_TRUE(t.raw().S.has_value());
  EXPECT_FALSE(single_path_topology(4, {{0, 1}, {0, 2}}).raw().S.has_value());
}

TEST(PlaceKernel, WritesEdgeSlotsOnly) {
  const NetworkTopology t = haar_topology(1, 4);
  const std::vector<double> h = {1, 2, 3, 4};
  EXPECT_EQ(place_kernel(t, h, 0), (std::vector<double>{1, 0, 2, 0}));
  EXPECT_EQ(place_kernel(t, h, 1), (std::vector<double>{3, 0, 4, 0}));
  EXPECT_THROW(place_kernel(t, std::vector<double>{1, 2}, 0), ShapeError);
  EXPECT_THROW(place_kernel(t, h, 2), std::out_of_range);
}

TEST(FactorMaps, IdentityForUnitDelta) {
  const NetworkTopology t = single_path_topology(4, {{0}});
  const FactorMaps fm = build_factor_maps(t);
  EXPECT_TRUE(fm.product(ParamTuple(Factors{{1.0}})).isApprox(Eigen::MatrixXd::Identity(4, 4)));
}

TEST(FactorMaps, AllOnesChainGivesAllOnesMatrix) {
  const NetworkTopology t = single_path_topology(4, {{0, 1}, {0, 2}});
  const Eigen::MatrixXd M = build_factor_maps(t).product(ones(2, 2));
  EXPECT_EQ(M, Eigen::MatrixXd::Ones(4, 4));
}

TEST(FactorMaps, ShiftWrapsCircularly) {
  const NetworkTopology t = single_path_topology(4, {{3}, {2}});
  const Eigen::MatrixXd M = build_factor_maps(t).product(ParamTuple(Factors{{1.0}, {1.0}}));
  for (int c = 0; c < 4; ++c) {
    for (int r = 0; r < 4; ++r) EXPECT_EQ(M(r, c), r == (c + 1) % 4 ? 1.0 : 0.0);
  }
}

TEST(Multiconv, Examples) {
  const NetworkTopology a = single_path_topology(8, {{0, 2}, {0, 1}});
  EXPECT_EQ(multiconv(a, 0, ones(2, 2)), (std::vector<double>{1, 1, 1, 1, 0, 0, 0, 0}));
  const NetworkTopology b = single_path_topology(4, {{0, 1}, {0, 1}});
  EXPECT_EQ(multiconv(b, 0, ones(2, 2)), (std::vector<double>{1, 2, 1, 0}));
  EXPECT_EQ(circular_convolve(std::vector<double>{0, 0, 1}, std::vector<double>{0, 1, 0}),
            (std::vector<double>{1, 0, 0}));
}

TEST(Multiconv, HaarPathSumset) {
  const NetworkTopology t = haar_topology(2, 8);
  const auto y = multiconv(t, 0, ones(2, 8));
  EXPECT_EQ(y, (std::vector<double>{1, 0, 1, 0, 1, 0, 1, 0}));
}

TEST(ApplyNetwork, MatchesFactorProduct) {
  std::mt19937_64 rng(31);
  const NetworkTopology tops[] = {haar_topology(1, 4), haar_topology(2, 8), haar_topology(3, 16),
                                  single_path_topology(8, {{0, 1, 5}, {0, 2, 3}})};
  for (const auto& t : tops) {
    const FactorMaps fm = build_factor_maps(t);
    for (int trial = 0; trial < 5; ++trial) {
      const ParamTuple h = oracle::random_tuple(t.K(), t.S(), rng);
      const Eigen::MatrixXd P = fm.product(h);
      const Eigen::MatrixXd Q = oracle::product_by_application(t, h);
      EXPECT_LE((P - Q).norm(), 1e-13 * (1 + P.norm()));
    }
  }
}

TEST(ApplyNetwork, Linear) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-1, 1);
  const NetworkTopology t = haar_topology(2, 8);
  const ParamTuple h = oracle::random_tuple(2, 8, rng);
  std::vector<double> x(32), y(32), z(32);
  for (int i = 0; i < 32; ++i) {
    x[i] = u(rng);
    y[i] = u(rng);
    z[i] = 2 * x[i] - 3 * y[i];
  }
  const auto ax = apply_network(t, h, x), ay = apply_network(t, h, y), az = apply_network(t, h, z);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(az[i], 2 * ax[i] - 3 * ay[i], 1e-13);
  EXPECT_THROW(apply_network(t, h, std::vector<double>(8)), ShapeError);
}

TEST(PathRestriction, PicksPathSlotsAndPads) {
  const NetworkTopology t = haar_topology(2, 8);
  ParamTuple h({{1, 2, 3, 4, 0, 0, 0, 0}, {5, 6, 7, 8, 9, 10, 11, 12}});
  const auto& paths = t.paths().paths();
  EXPECT_EQ(path_restriction(h, t, paths[0]), ParamTuple({{1, 2}, {5, 6}}));
  EXPECT_EQ(path_restriction(h, t, paths[3]), ParamTuple({{3, 4}, {11, 12}}));

  RawTopology raw = chain(4, {{0, 1, 2}, {0}});
  raw.S = 3;
  const NetworkTopology u = validate_topology(raw);
  EXPECT_EQ(path_restriction(ParamTuple({{1, 2, 3}, {4, 0, 0}}), u, u.paths()[0]),
            ParamTuple({{1, 2, 3}, {4, 0, 0}}));
}

TEST(Flatten, ColumnMajor) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 2, 3, 4;
  const Eigen::VectorXd v = flatten(m);
  EXPECT_EQ(v(1), 3.0);
  EXPECT_EQ(v(2), 2.0);
}
