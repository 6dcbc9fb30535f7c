#include "liftcert/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "liftcert/certify.hpp"
#include "liftcert/equivalence.hpp"
#include "liftcert/errors.hpp"
#include "liftcert/lifting.hpp"
#include "liftcert/parallel.hpp"

namespace liftcert {

namespace {

constexpr int kMaxReinit = 16;
constexpr int kMaxCorruptDoublings = 200;

std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

bool slice_is_zero(const FactorMaps& fm, int k, int slot) {
  return (fm.slice(k, slot).array() == 0.0).all();
}

/// Slots of S_k whose slice is nonzero; the remaining slots cannot affect X.
std::vector<std::vector<int>> active_slots(const FactorMaps& fm, const Support& support) {
  std::vector<std::vector<int>> out(support.K());
  for (int k = 0; k < support.K(); ++k) {
    for (int slot : support.layer(k)) {
      if (!slice_is_zero(fm, k, slot)) out[k].push_back(slot);
    }
  }
  return out;
}

void randomize(ParamTuple& h, const std::vector<std::vector<int>>& slots, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int k = 0; k < h.K(); ++k) {
    auto f = h.factor(k);
    std::fill(f.begin(), f.end(), 0.0);
    for (int slot : slots[k]) f[slot - 1] = unit(rng);
  }
}

/// Equalizes factor infinity norms without changing the product.
void rebalance(ParamTuple& h) {
  std::vector<double> n(h.K());
  double log_mean = 0.0;
  for (int k = 0; k < h.K(); ++k) {
    n[k] = vector_norm(h.factor(k), NormOrder::inf());
    if (n[k] == 0.0) return;
    log_mean += std::log(n[k]);
  }
  const double mu = std::exp(log_mean / h.K());
  for (int k = 0; k < h.K(); ++k) {
    for (double& x : h.factor(k)) x *= mu / n[k];
  }
}

struct RestartOutcome {
  ParamTuple params;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
  double eta = std::numeric_limits<double>::infinity();
};

RestartOutcome run_restart(const FactorMaps& fm, const Eigen::MatrixXd& X,
                           const std::vector<std::vector<int>>& slots, const SolverOptions& opt,
                           std::mt19937_64& rng) {
  const int K = fm.K();
  RestartOutcome out;
  out.params = ParamTuple(K, fm.S());
  ParamTuple& h = out.params;
  for (const auto& layer : slots) {
    if (layer.empty()) {
      out.eta = residual(fm, h, X);
      out.converged = true;
      return out;
    }
  }
  randomize(h, slots, rng);
  const Eigen::Map<const Eigen::VectorXd> x(X.data(), X.size());
  int reinit = 0;
  double prev = residual(fm, h, X);
  for (int it = 0; it < opt.max_iters && prev > 0.0; ++it) {
    bool degenerate = false;
    for (int k = 0; k < K && !degenerate; ++k) {
      Eigen::MatrixXd L = Eigen::MatrixXd::Identity(fm.rows(0), fm.rows(0));
      for (int j = 0; j < k; ++j) L = L * fm.factor(j, h.factor(j));
      Eigen::MatrixXd R = Eigen::MatrixXd::Identity(fm.cols(K - 1), fm.cols(K - 1));
      for (int j = K - 1; j > k; --j) R = fm.factor(j, h.factor(j)) * R;
      Eigen::MatrixXd D(X.size(), static_cast<Eigen::Index>(slots[k].size()));
      for (std::size_t c = 0; c < slots[k].size(); ++c) {
        D.col(static_cast<Eigen::Index>(c)) = flatten(L * fm.slice(k, slots[k][c]) * R);
      }
      if ((D.array() == 0.0).all()) {
        degenerate = true;
        break;
      }
      Eigen::VectorXd sol = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(D).solve(x);
      for (std::size_t c = 0; c < slots[k].size(); ++c) {
        h.factor(k)[slots[k][c] - 1] = sol(static_cast<Eigen::Index>(c));
      }
    }
    if (degenerate) {
      // A zero factor is optimal when X itself is reached exactly.
      if (residual(fm, h, X) == 0.0) {
        prev = 0.0;
        break;
      }
      if (++reinit > kMaxReinit) break;
      randomize(h, slots, rng);
      prev = residual(fm, h, X);
      continue;
    }
    rebalance(h);
    const double r = residual(fm, h, X);
    out.trace.push_back(r);
    out.iterations = it + 1;
    if (prev - r <= opt.tol * prev) {
      out.converged = true;
      break;
    }
    prev = r;
  }
  if (prev == 0.0) out.converged = true;
  out.eta = residual(fm, h, X);
  return out;
}

bool covers_every_edge(const NetworkTopology& topo, const Support& s) {
  for (std::size_t e = 0; e < topo.edges().size(); ++e) {
    const int k = topo.edges()[e].depth - 1;
    bool hit = false;
    for (int slot : topo.slot_map().slots_of_edge(k, static_cast<int>(e))) {
      hit = hit || s.contains(k, slot);
    }
    if (!hit) return false;
  }
  return true;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

void tally(BoundTally& t, bool pre, bool sat, const std::optional<double>& lhs,
           const std::optional<double>& rhs) {
  if (!pre) return;
  ++t.precondition_met;
  if (sat) ++t.satisfied;
  if (lhs && rhs && *rhs > 0.0) t.max_ratio = std::max(t.max_ratio, *lhs / *rhs);
}

TrialRecord run_trial(const ExperimentConfig& cfg, const SupportFamily& family,
                      const std::vector<std::size_t>& covering, const SweepConstants& constants,
                      const FactorMaps& fm, int t) {
  const NetworkTopology& topo = cfg.topology;
  TrialRecord rec;
  rec.trial = t;
  rec.delta = cfg.delta_grid.at(static_cast<std::size_t>(t / cfg.trials));
  try {
    auto rng = seeded_rng(cfg.seed, static_cast<std::uint64_t>(t));
    std::uniform_int_distribution<std::size_t> pick(0, covering.size() - 1);
    const Support& truth = family[covering[pick(rng)]];
    const std::uint64_t instance_seed = rng();
    SolverOptions solver = cfg.solver;
    solver.seed = rng();

    const Instance inst = synthesize_instance(topo, truth, rec.delta, instance_seed);
    SolveResult sol = cfg.mode == ExperimentMode::Oracle
                          ? als_recover(topo, fm, inst.observed, truth, solver)
                          : support_search(topo, inst.observed, family, solver);
    const double eta = sol.eta;
    rec.eta = eta;
    ParamTuple hstar = sol.params;

    if (cfg.corrupt) {
      const double rhs =
          theorem7_certificate(inst.params, hstar, rec.delta, eta, topo, cfg.p).bound.rhs;
      double m = std::max(rhs, 1e-8);
      ParamTuple bad = hstar;
      for (int i = 0; i < kMaxCorruptDoublings; ++i, m *= 2.0) {
        bad = hstar;
        for (int slot : inst.support.layer(0)) bad.factor(0)[slot - 1] += m;
        if (bad.nonzero_class() && network_dist(bad, inst.params, cfg.p, topo) > 2.0 * rhs) break;
      }
      hstar = bad;
    }

    const TensorK Pbar = segre(inst.params);
    const TensorK Pstar = segre(hstar);
    rec.lhs_t3_tensor = tensor_norm(Pstar - Pbar, NormOrder(2.0));
    if (hstar.nonzero_class()) rec.lhs_t3_dp = dp_dist(hstar, inst.params, cfg.p);
    if (constants.gamma && constants.sigma) {
      const auto r = theorem3_certificate(inst.params, hstar, rec.delta, eta, *constants.gamma,
                                          *constants.rho, *constants.sigma, cfg.p);
      rec.rhs_t3_tensor = r.tensor.rhs;
      rec.rhs_t3_dp = r.dp.rhs;
      rec.precond_t3 = r.tensor.precondition_met;
      rec.precond_t3_dp = r.dp.precondition_met;
      rec.satisfied_t3_tensor = r.tensor.satisfied;
      rec.satisfied_t3_dp = r.dp.satisfied;
    }

    const auto r7 = theorem7_certificate(inst.params, hstar, rec.delta, eta, topo, cfg.p);
    rec.eps = r7.eps;
    rec.lhs_t7 = r7.bound.lhs;
    rec.rhs_t7 = r7.bound.rhs;
    rec.precond_t7 = constants.identifiable && r7.bound.precondition_met;
    rec.satisfied_t7 = r7.bound.satisfied;

    rec.satisfied_all = (!rec.precond_t3 || rec.satisfied_t3_tensor) &&
                        (!rec.precond_t3_dp || rec.satisfied_t3_dp) &&
                        (!rec.precond_t7 || rec.satisfied_t7);
  } catch (const std::exception& e) {
    rec.error = e.what();
    rec.satisfied_all = false;
  }
  return rec;
}

}  // namespace

double residual(const FactorMaps& fm, const ParamTuple& h, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd P = fm.product(h);
  if (P.rows() != X.rows() || P.cols() != X.cols()) {
    throw ShapeError("observation has shape " + std::to_string(X.rows()) + "x" +
                     std::to_string(X.cols()) + ", expected " + std::to_string(P.rows()) + "x" +
                     std::to_string(P.cols()));
  }
  return (P - X).norm();
}

Instance synthesize_instance(const NetworkTopology& topo, const Support& support, double delta,
                             std::uint64_t seed) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be >= 0");
  if (support.K() != topo.K() || support.S() != topo.S()) {
    throw ShapeError("support shape differs from topology");
  }
  auto rng = seeded_rng(seed, 0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> level(kKernelFloor, 1.0);

  Instance inst;
  inst.support = support;
  inst.delta = delta;
  inst.seed = seed;
  inst.params = ParamTuple(topo.K(), topo.S());
  for (std::size_t e = 0; e < topo.edges().size(); ++e) {
    const int k = topo.edges()[e].depth - 1;
    std::vector<int> slots;
    for (int slot : topo.slot_map().slots_of_edge(k, static_cast<int>(e))) {
      if (support.contains(k, slot)) slots.push_back(slot);
    }
    if (slots.empty()) {
      throw std::invalid_argument("support leaves edge " + topo.node_names()[topo.edges()[e].from] +
                                  " -> " + topo.node_names()[topo.edges()[e].to] +
                                  " without parameters");
    }
    auto f = inst.params.factor(k);
    double peak = 0.0;
    while (peak == 0.0) {
      for (int slot : slots) {
        f[slot - 1] = unit(rng);
        peak = std::max(peak, std::abs(f[slot - 1]));
      }
    }
    const double scale = level(rng) / peak;
    for (int slot : slots) f[slot - 1] *= scale;
  }

  const FactorMaps fm = build_factor_maps(topo);
  const Eigen::MatrixXd clean = fm.product(inst.params);
  inst.noise = Eigen::MatrixXd::Zero(clean.rows(), clean.cols());
  if (delta > 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index c = 0; c < clean.cols(); ++c) {
      for (Eigen::Index r = 0; r < clean.rows(); ++r) inst.noise(r, c) = gauss(rng);
    }
    inst.noise *= delta / inst.noise.norm();
  }
  inst.observed = clean + inst.noise;
  return inst;
}

SolveResult als_recover(const NetworkTopology& topo, const FactorMaps& fm, const Eigen::MatrixXd& X,
                        const Support& support, const SolverOptions& options) {
  if (support.K() != topo.K() || support.S() != topo.S()) {
    throw ShapeError("support shape differs from topology");
  }
  if (X.rows() != fm.rows(0) || X.cols() != fm.cols(fm.K() - 1)) {
    throw ShapeError("observation has shape " + std::to_string(X.rows()) + "x" +
                     std::to_string(X.cols()) + ", expected " + std::to_string(fm.rows(0)) + "x" +
                     std::to_string(fm.cols(fm.K() - 1)));
  }
  if (options.restarts < 1 || options.max_iters < 1 || !(options.tol >= 0.0)) {
    throw std::invalid_argument("solver needs restarts >= 1, maxIters >= 1, tol >= 0");
  }
  const auto slots = active_slots(fm, support);
  RestartOutcome best;
  for (int r = 0; r < options.restarts; ++r) {
    auto rng = seeded_rng(options.seed, static_cast<std::uint64_t>(r));
    RestartOutcome o = run_restart(fm, X, slots, options, rng);
    if (r == 0 || o.eta < best.eta) best = std::move(o);
    if (best.eta == 0.0) break;
  }
  SolveResult out;
  out.support = support;
  out.params = std::move(best.params);
  out.eta = residual(fm, out.params, X);
  out.iterations = best.iterations;
  out.converged = best.converged;
  out.residual_trace = std::move(best.trace);
  return out;
}

SolveResult als_recover(const NetworkTopology& topo, const Eigen::MatrixXd& X,
                        const Support& support, const SolverOptions& options) {
  return als_recover(topo, build_factor_maps(topo), X, support, options);
}

SolveResult support_search(const NetworkTopology& topo, const Eigen::MatrixXd& X,
                           const SupportFamily& family, const SolverOptions& options,
                           std::size_t cap) {
  if (family.size() > cap) {
    throw std::length_error("support family has " + std::to_string(family.size()) +
                            " members, cap is " + std::to_string(cap));
  }
  const FactorMaps fm = build_factor_maps(topo);
  std::optional<SolveResult> best;
  for (const Support& s : family.members()) {
    SolveResult r = als_recover(topo, fm, X, s, options);
    if (!best || r.eta < best->eta) best = std::move(r);
  }
  return *best;
}

SweepConstants sweep_constants(const NetworkTopology& topo, const SupportFamily& family, int jobs) {
  SweepConstants c;
  const FactorMaps fm = build_factor_maps(topo);
  c.identifiable = identifiability_test(topo, fm, family).pass;
  const LiftingOperator A = build_lifting(fm);
  const auto spectra = pair_spectra(A, family, jobs);
  const bool nsp = sufficient_nsp_check(spectra).all_pass;
  const bool single = single_path_sigma(topo, family).applicable;
  if (!nsp && !single) return c;
  try {
    c.sigma = deep_lower_rip(spectra).sigma;
  } catch (const std::domain_error&) {
    return c;
  }
  c.gamma = 1.0;
  c.rho = std::numeric_limits<double>::infinity();
  return c;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.delta_grid.empty()) throw std::invalid_argument("deltaGrid must be nonempty");
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  for (double d : cfg.delta_grid) {
    if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("deltaGrid entries must be >= 0");
  }
  const NetworkTopology& topo = cfg.topology;
  const SupportFamily family =
      cfg.family ? *cfg.family : SupportFamily({Support::full(topo.K(), topo.S())});
  if (family.K() != topo.K() || family.S() != topo.S()) {
    throw ShapeError("support family shape differs from topology");
  }
  std::vector<std::size_t> covering;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (covers_every_edge(topo, family[i])) covering.push_back(i);
  }
  if (covering.empty()) throw std::invalid_argument("no family member gives every edge a parameter");

  ExperimentResult res;
  res.constants = sweep_constants(topo, family, cfg.jobs);
  const FactorMaps fm = build_factor_maps(topo);
  const int total = static_cast<int>(cfg.delta_grid.size()) * cfg.trials;
  res.trials.resize(total);
  parallel_for(static_cast<std::size_t>(total), cfg.jobs, [&](std::size_t t) {
    res.trials[t] = run_trial(cfg, family, covering, res.constants, fm, static_cast<int>(t));
  });

  double eta_sum = 0.0;
  int eta_count = 0;
  for (const auto& r : res.trials) {
    if (!r.error.empty()) ++res.errors;
    if (!r.satisfied_all) res.violation = true;
    tally(res.t3_tensor, r.precond_t3, r.satisfied_t3_tensor, r.lhs_t3_tensor, r.rhs_t3_tensor);
    tally(res.t3_dp, r.precond_t3_dp, r.satisfied_t3_dp, r.lhs_t3_dp, r.rhs_t3_dp);
    tally(res.t7, r.precond_t7, r.satisfied_t7, r.lhs_t7, r.rhs_t7);
    if (r.eta) {
      eta_sum += *r.eta;
      ++eta_count;
      res.max_eta = std::max(res.max_eta, *r.eta);
      if (*r.eta > r.delta) ++res.eta_above_delta;
    }
    if (r.delta == 0.0 && r.lhs_t7) {
      res.max_network_dist_noiseless = std::max(res.max_network_dist_noiseless, *r.lhs_t7);
    }
  }
  res.mean_eta = eta_count ? eta_sum / eta_count : 0.0;
  return res;
}

std::string experiment_csv(const ExperimentResult& result) {
  std::ostringstream os;
  os << "trial,delta,eta,eps,lhs_t3_tensor,rhs_t3_tensor,lhs_t3_dp,rhs_t3_dp,lhs_t7,rhs_t7,"
        "precond_t3,precond_t7,satisfied_all,precond_t3_dp,error\n";
  for (const auto& r : result.trials) {
    os << r.trial << ',' << fmt(r.delta) << ',' << fmt(r.eta) << ',' << fmt(r.eps) << ','
       << fmt(r.lhs_t3_tensor) << ',' << fmt(r.rhs_t3_tensor) << ',' << fmt(r.lhs_t3_dp) << ','
       << fmt(r.rhs_t3_dp) << ',' << fmt(r.lhs_t7) << ',' << fmt(r.rhs_t7) << ','
       << int(r.precond_t3) << ',' << int(r.precond_t7) << ',' << int(r.satisfied_all) << ','
       << int(r.precond_t3_dp) << ',' << csv_quote(r.error) << '\n';
  }
  return os.str();
}

}  // namespace liftcert
