#pragma once

// Synthetic instances X = M_1(h_1) ... M_K(h_K) + e, an alternating
// least-squares solver for the sparse factorization, and seeded sweeps that
// evaluate the recovery bounds on each solve.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "liftcert/network.hpp"
#include "liftcert/norm_order.hpp"
#include "liftcert/tensor.hpp"

namespace liftcert {

/// Lower bound on every edge-kernel infinity norm of a synthesized tuple.
inline constexpr double kKernelFloor = 0.2;

struct Instance {
  Support support;
  ParamTuple params;
  Eigen::MatrixXd observed;  // product(params) + noise
  Eigen::MatrixXd noise;     // Frobenius norm equals delta
  double delta = 0.0;
  std::uint64_t seed = 0;
};

/// Entries of h on the active slots of `support` are uniform on [-1, 1]; each
/// edge kernel is then rescaled to an infinity norm uniform on
/// [kKernelFloor, 1]. Throws std::invalid_argument if some edge receives no
/// slot of the support, or delta < 0.
Instance synthesize_instance(const NetworkTopology& topo, const Support& support, double delta,
                             std::uint64_t seed);

struct SolverOptions {
  int max_iters = 2000;
  /// Sweeps stop once r_prev - r <= tol * r_prev.
  double tol = 1e-14;
  int restarts = 8;
  std::uint64_t seed = 0;
};

struct SolveResult {
  Support support;
  ParamTuple params;
  double eta = 0.0;  // ||product(params) - X||_F
  int iterations = 0;
  bool converged = false;
  /// Residual after each sweep of the kept restart; nonincreasing up to
  /// rounding.
  std::vector<double> residual_trace;
};

/// ||product(h) - X||_F.
double residual(const FactorMaps& fm, const ParamTuple& h, const Eigen::MatrixXd& X);

/// Block coordinate descent over the layers: with all other factors fixed,
/// h_k restricted to S_k is the minimum-norm least-squares solution. Factors
/// are rebalanced to equal infinity norms after every sweep. The best of
/// `restarts` random initializations is kept.
SolveResult als_recover(const NetworkTopology& topo, const FactorMaps& fm, const Eigen::MatrixXd& X,
                        const Support& support, const SolverOptions& options);
SolveResult als_recover(const NetworkTopology& topo, const Eigen::MatrixXd& X,
                        const Support& support, const SolverOptions& options);

/// Runs als_recover on every member; the smallest eta wins, ties going to the
/// earliest member. Throws std::length_error above `cap` members.
SolveResult support_search(const NetworkTopology& topo, const Eigen::MatrixXd& X,
                           const SupportFamily& family, const SolverOptions& options,
                           std::size_t cap = SupportFamily::kDefaultCap);

enum class ExperimentMode { Oracle, Search };

struct ExperimentConfig {
  NetworkTopology topology;
  std::optional<SupportFamily> family;  // full support when absent
  std::vector<double> delta_grid;
  int trials = 1;  // per delta value
  NormOrder p = NormOrder(2.0);
  SolverOptions solver;
  std::uint64_t seed = 0;
  ExperimentMode mode = ExperimentMode::Oracle;
  /// Negative control: inflate h* on layer 1 until the network distance
  /// exceeds twice the network bound.
  bool corrupt = false;
  int jobs = 1;
};

struct TrialRecord {
  int trial = 0;
  double delta = 0.0;
  std::optional<double> eta;
  std::optional<double> eps;
  std::optional<double> lhs_t3_tensor, rhs_t3_tensor;
  std::optional<double> lhs_t3_dp, rhs_t3_dp;
  std::optional<double> lhs_t7, rhs_t7;
  bool precond_t3 = false;
  bool precond_t3_dp = false;
  bool precond_t7 = false;
  bool satisfied_t3_tensor = false;
  bool satisfied_t3_dp = false;
  bool satisfied_t7 = false;
  /// Every precondition-met bound holds and no error occurred.
  bool satisfied_all = false;
  std::string error;
};

/// Stability constants shared by all trials of a sweep.
struct SweepConstants {
  bool identifiable = false;
  std::optional<double> gamma;
  std::optional<double> rho;
  std::optional<double> sigma;
};

struct BoundTally {
  int precondition_met = 0;
  int satisfied = 0;
  double max_ratio = 0.0;  // max lhs/rhs over precondition-met trials with rhs > 0
};

struct ExperimentResult {
  SweepConstants constants;
  std::vector<TrialRecord> trials;
  BoundTally t3_tensor, t3_dp, t7;
  int errors = 0;
  int eta_above_delta = 0;
  double max_eta = 0.0;
  double mean_eta = 0.0;
  /// Largest lhs_t7 over delta = 0 trials.
  double max_network_dist_noiseless = 0.0;
  /// Any precondition-met violation or trial error.
  bool violation = false;
};

/// Constants from the family: (gamma, rho, sigma) under the sufficient
/// null-space or single-path conditions, plus the {0,1} test verdict.
SweepConstants sweep_constants(const NetworkTopology& topo, const SupportFamily& family, int jobs);

/// Trial t (0-based, delta-major) draws from an RNG seeded by (seed, t), so
/// output does not depend on `jobs`.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string experiment_csv(const ExperimentResult& result);

}  // namespace liftcert
