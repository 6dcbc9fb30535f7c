#include <cmath>

#include <gtest/gtest.h>

#include "liftcert/certify.hpp"
#include "liftcert/recovery.hpp"

using namespace liftcert;

TEST(Synthesize, NoiseLevelFloorAndDeterminism) {
  const NetworkTopology t = haar_topology(2, 8);
  const Support full = Support::full(2, 8);
  const Instance clean = synthesize_instance(t, full, 0.0, 7);
  EXPECT_EQ(clean.noise.norm(), 0.0);
  EXPECT_EQ(clean.observed, build_factor_maps(t).product(clean.params));
  EXPECT_GE(min_edge_kernel_norm(clean.params, t), kKernelFloor);

  const Instance noisy = synthesize_instance(t, full, 1e-3, 7);
  EXPECT_NEAR(noisy.noise.norm(), 1e-3, 1e-15);
  EXPECT_EQ(noisy.params, clean.params);
  EXPECT_EQ(synthesize_instance(t, full, 1e-3, 7).observed, noisy.observed);
  EXPECT_FALSE(synthesize_instance(t, full, 0.0, 8).params == clean.params);

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Instance i = synthesize_instance(t, full, 0.0, seed);
    EXPECT_GE(min_edge_kernel_norm(i.params, t), kKernelFloor);
    for (int k = 0; k < 2; ++k) {
      for (double x : i.params.factor(k)) EXPECT_LE(std::abs(x), 1.0);
    }
  }
}

TEST(Synthesize, RejectsUncoveredEdgeAndNegativeDelta) {
  const NetworkTopology t = haar_topology(1, 4);
  EXPECT_THROW(synthesize_instance(t, Support(4, {{1, 2}}), 0.0, 1), std::invalid_argument);
  EXPECT_THROW(synthesize_instance(t, Support::full(1, 4), -1.0, 1), std::invalid_argument);
}

TEST(Als, RecoversNoiselessProducts) {
  const NetworkTopology tops[] = {single_path_topology(8, {{0, 1}, {0, 2}, {0, 4}}),
                                  haar_topology(1, 4), haar_topology(2, 8)};
  SolverOptions opt;
  opt.seed = 3;
  for (const auto& t : tops) {
    const Support full = Support::full(t.K(), t.S());
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Instance inst = synthesize_instance(t, full, 0.0, seed);
      const SolveResult r = als_recover(t, inst.observed, full, opt);
      EXPECT_LE(r.eta, 1e-8 * inst.observed.norm());
      EXPECT_NEAR(r.eta, residual(build_factor_maps(t), r.params, inst.observed), 1e-12);
    }
  }
}

TEST(Als, ZeroObservationGivesZeroResidual) {
  const NetworkTopology t = haar_topology(2, 8);
  const Eigen::MatrixXd X = Eigen::MatrixXd::Zero(8, 32);
  const SolveResult r = als_recover(t, X, Support::full(2, 8), SolverOptions{});
  EXPECT_EQ(r.eta, 0.0);
  EXPECT_TRUE(r.converged);
}

TEST(Als, ResidualTraceIsMonotone) {
  const NetworkTopology t = haar_topology(2, 8);
  const Support full = Support::full(2, 8);
  SolverOptions opt;
  opt.restarts = 1;
  opt.max_iters = 200;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Instance inst = synthesize_instance(t, full, 0.05, seed);
    opt.seed = seed;
    const SolveResult r = als_recover(t, inst.observed, full, opt);
    ASSERT_FALSE(r.residual_trace.empty());
    for (std::size_t i = 1; i < r.residual_trace.size(); ++i) {
      EXPECT_LE(r.residual_trace[i], r.residual_trace[i - 1] * (1 + 1e-12) + 1e-15);
    }
  }
}

TEST(Als, SameSeedSameResult) {
  const NetworkTopology t = haar_topology(2, 8);
  const Instance inst = synthesize_instance(t, Support::full(2, 8), 0.01, 4);
  SolverOptions opt;
  opt.seed = 9;
  const SolveResult a = als_recover(t, inst.observed, inst.support, opt);
  const SolveResult b = als_recover(t, inst.observed, inst.support, opt);
  EXPECT_EQ(a.params, b.params);
  EXPECT_EQ(a.residual_trace, b.residual_trace);
}

TEST(SupportSearch, PicksTrueSupportAndBreaksTiesEarly) {
  const NetworkTopology t = single_path_topology(8, {{0, 1}, {0, 2}, {0, 4}});
  const Support truth(2, {{2}, {1, 2}, {1}});
  const Support wrong(2, {{1}, {2}, {2}});
  const Instance inst = synthesize_instance(t, truth, 0.0, 5);
  const SolveResult r = support_search(t, inst.observed, SupportFamily({wrong, truth}), {});
  EXPECT_EQ(r.support, truth);
  EXPECT_LE(r.eta, 1e-10);

  const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(8, 8);
  EXPECT_EQ(support_search(t, Z, SupportFamily({wrong, truth}), {}).support, wrong);

  EXPECT_THROW(support_search(t, Z, SupportFamily({wrong, truth}), {}, 1), std::length_error);
}

TEST(Experiment, DeterministicAcrossJobs) {
  ExperimentConfig cfg;
  cfg.topology = haar_topology(1, 4);
  cfg.delta_grid = {0.0, 1e-3};
  cfg.trials = 4;
  cfg.seed = 11;
  cfg.solver.restarts = 2;
  const ExperimentResult a = run_experiment(cfg);
  cfg.jobs = 3;
  const ExperimentResult b = run_experiment(cfg);
  EXPECT_EQ(experiment_csv(a), experiment_csv(b));
  EXPECT_FALSE(a.violation);
  EXPECT_EQ(a.trials.size(), 8u);
  EXPECT_EQ(a.t7.precondition_met, a.t7.satisfied);
  EXPECT_LE(a.max_network_dist_noiseless, 1e-6);
}

TEST(Experiment, CorruptionIsDetected) {
  ExperimentConfig cfg;
  cfg.topology = haar_topology(2, 8);
  cfg.delta_grid = {1e-3};
  cfg.trials = 3;
  cfg.seed = 12;
  cfg.solver.restarts = 2;
  cfg.corrupt = true;
  const ExperimentResult r = run_experiment(cfg);
  EXPECT_TRUE(r.violation);
  for (const auto& t : r.trials) {
    EXPECT_TRUE(t.precond_t7);
    EXPECT_FALSE(t.satisfied_t7);
  }
}
