#include "liftcert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "liftcert/errors.hpp"
#include "liftcert/parallel.hpp"

namespace liftcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::vector<PairSpectrum> pair_spectra(const LiftingOperator& A, const SupportFamily& family,
                                       int jobs) {
  if (family.K() != A.K() || family.S() != A.S()) {
    throw ShapeError("support family shape differs from operator");
  }
  std::vector<PairSpectrum> pairs;
  std::map<Support, std::size_t> union_slot;
  std::vector<Support> unions;
  std::vector<std::size_t> pair_union;
  for (std::size_t a = 0; a < family.size(); ++a) {
    for (std::size_t b = a; b < family.size(); ++b) {
      PairSpectrum ps;
      ps.pair_index = pairs.size();
      ps.member_a = a;
      ps.member_b = b;
      ps.union_support = support_union(family[a], family[b]);
      auto [it, inserted] = union_slot.emplace(ps.union_support, unions.size());
      if (inserted) unions.push_back(ps.union_support);
      pair_union.push_back(it->second);
      pairs.push_back(std::move(ps));
    }
  }
  std::vector<SpectralSummary> summaries(unions.size());
  std::vector<std::size_t> cube(unions.size());
  parallel_for(unions.size(), jobs, [&](std::size_t u) {
    auto cols = A.cube_columns(unions[u]);
    cube[u] = cols.size();
    summaries[u] = spectral_summary(A.matrix(), cols);
  });
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pairs[i].summary = summaries[pair_union[i]];
    pairs[i].cube_columns = cube[pair_union[i]];
  }
  return pairs;
}

NspResult sufficient_nsp_check(const std::vector<PairSpectrum>& spectra) {
  NspResult out;
  out.all_pass = !spectra.empty();
  for (const auto& ps : spectra) {
    NspPairResult r;
    r.pair_index = ps.pair_index;
    r.indeterminate = ps.summary.indeterminate;
    r.pass = !r.indeterminate && static_cast<std::size_t>(ps.summary.rank) == ps.cube_columns &&
             ps.cube_columns > 0;
    out.all_pass = out.all_pass && r.pass;
    out.per_pair.push_back(r);
  }
  if (out.all_pass) {
    out.gamma = 1.0;
    out.rho = kInf;
  }
  return out;
}

NspResult sufficient_nsp_check(const LiftingOperator& A, const SupportFamily& family, int jobs) {
  return sufficient_nsp_check(pair_spectra(A, family, jobs));
}

LowerRipResult deep_lower_rip(std::vector<PairSpectrum> spectra) {
  if (spectra.empty()) throw std::invalid_argument("support family must be nonempty");
  LowerRipResult out;
  out.sigma = kInf;
  for (const auto& ps : spectra) {
    if (ps.summary.rank == 0) {
      throw std::domain_error("empty operator for pair " + std::to_string(ps.pair_index) + " (" +
                              std::to_string(ps.member_a) + ", " + std::to_string(ps.member_b) +
                              ")");
    }
    out.sigma = std::min(out.sigma, ps.summary.sigma_min_nonzero);
  }
  out.per_pair = std::move(spectra);
  return out;
}

LowerRipResult deep_lower_rip(const LiftingOperator& A, const SupportFamily& family, int jobs) {
  return deep_lower_rip(pair_spectra(A, family, jobs));
}

SinglePathSigma single_path_sigma(const NetworkTopology& topo) {
  return single_path_sigma(topo, SupportFamily({Support::full(topo.K(), topo.S())}));
}

SinglePathSigma single_path_sigma(const NetworkTopology& topo, const SupportFamily& family) {
  SinglePathSigma out;
  if (topo.paths().size() != 1) {
    out.reason = "network has " + std::to_string(topo.paths().size()) + " paths";
    return out;
  }
  auto ident = identifiability_test(topo, family);
  if (!ident.pass) {
    out.reason = "identifiability test fails";
    return out;
  }
  out.applicable = true;
  out.sigma = std::sqrt(static_cast<double>(topo.N()));
  out.gamma = 1.0;
  out.rho = kInf;
  return out;
}

double spectral_radius(const LiftingOperator& A) { return spectral_summary(A.matrix()).sigma_max; }

double converse_gamma(double C, int S, int K, double sigma_max) {
  if (!(C > 0.0) || S < 1 || K < 1 || !(sigma_max > 0.0)) {
    throw std::invalid_argument("converse constant needs C > 0, S >= 1, K >= 1, sigma_max > 0");
  }
  return C * std::pow(static_cast<double>(S), (K - 1) / 2.0) * std::sqrt(static_cast<double>(K)) *
         sigma_max;
}

Theorem3Reports theorem3_certificate(const ParamTuple& hbar, const ParamTuple& hstar, double delta,
                                     double eta, double gamma, double rho, double sigma,
                                     NormOrder p) {
  if (!(sigma > 0.0)) throw std::invalid_argument("lower-RIP constant must be positive");
  if (!(gamma >= 1.0)) throw std::invalid_argument("gamma must be >= 1");
  const TensorK Pbar = segre(hbar);
  const TensorK Pstar = segre(hstar);
  const double scaled = gamma / sigma * (delta + eta);
  const bool gate = delta + eta <= rho;

  Theorem3Reports out;
  out.tensor = make_report(tensor_norm(Pstar - Pbar, NormOrder(2.0)), scaled, gate);

  const double sup_bar = tensor_norm(Pbar, NormOrder::inf());
  const double sup_star = tensor_norm(Pstar, NormOrder::inf());
  const double lhs = dp_dist(hstar, hbar, p);
  const double rhs = inverse_stability_factor(hbar.K(), hbar.S(), p, sup_bar, sup_star) * scaled;
  out.dp = make_report(lhs, rhs, gate && scaled <= 0.5 * std::max(sup_bar, sup_star));
  return out;
}

double min_edge_kernel_norm(const ParamTuple& h, const NetworkTopology& topo) {
  double eps = kInf;
  for (std::size_t e = 0; e < topo.edges().size(); ++e) {
    const int k = topo.edges()[e].depth - 1;
    auto kernel = place_kernel(topo, h.factor(k), static_cast<int>(e));
    eps = std::min(eps, vector_norm(kernel, NormOrder::inf()));
  }
  return eps;
}

Theorem7Report theorem7_certificate(const ParamTuple& hbar, const ParamTuple& hstar, double delta,
                                    double eta, const NetworkTopology& topo, NormOrder p) {
  Theorem7Report out;
  out.eps = min_edge_kernel_norm(hbar, topo);
  if (!(out.eps > 0.0)) throw std::domain_error("eps = 0, theorem inapplicable");
  const int K = topo.K();
  const double sqrtN = std::sqrt(static_cast<double>(topo.N()));
  const double rhs = 7.0 * std::pow(static_cast<double>(K) * topo.S(), p.reciprocal()) /
                     (sqrtN * std::pow(out.eps, K - 1)) * (delta + eta);
  bool pre = true;
  for (const auto& path : topo.paths().paths()) {
    const double sup_bar = tensor_norm(segre(path_restriction(hbar, topo, path)), NormOrder::inf());
    const double sup_star =
        tensor_norm(segre(path_restriction(hstar, topo, path)), NormOrder::inf());
    pre = pre && (delta + eta) / sqrtN <= 0.5 * std::max(sup_bar, sup_star);
  }
  const double lhs = network_dist(hstar, hbar, p, topo);
  out.bound = make_report(lhs, rhs, pre);
  return out;
}

bool CertificationReport::all_checks_pass() const {
  if (!identifiable.pass || !disjointness.pass || sigma_error) return false;
  if (!(sigma_family > 0.0)) return false;
  for (const auto& ps : per_pair) {
    if (ps.summary.indeterminate) return false;
  }
  for (const auto& kp : kernel) {
    if (!kp.check.pass) return false;
  }
  return true;
}

CertificationReport certify(const NetworkTopology& topo, const SupportFamily& family,
                            const CertifyOptions& options) {
  if (family.K() != topo.K() || family.S() != topo.S()) {
    throw ShapeError("support family (K, S) = (" + std::to_string(family.K()) + ", " +
                     std::to_string(family.S()) + ") does not match topology (" +
                     std::to_string(topo.K()) + ", " + std::to_string(topo.S()) + ")");
  }
  CertificationReport r;
  r.family_size = family.size();
  const FactorMaps fm = build_factor_maps(topo);
  r.identifiable = identifiability_test(topo, fm, family);
  r.disjointness = path_support_disjointness(topo, fm);
  r.single_path = single_path_sigma(topo, family);

  const LiftingOperator A = build_lifting(fm);
  r.sigma_max = spectral_radius(A);
  r.per_pair = pair_spectra(A, family, options.jobs);
  r.nsp = sufficient_nsp_check(r.per_pair);
  try {
    r.sigma_family = deep_lower_rip(r.per_pair).sigma;
  } catch (const std::domain_error& e) {
    r.sigma_error = e.what();
  }
  if (r.nsp.all_pass || r.single_path.applicable) {
    r.gamma = 1.0;
    r.rho = kInf;
  }
  if (options.converse_C && r.sigma_max > 0.0) {
    r.converse_gamma = converse_gamma(*options.converse_C, topo.S(), topo.K(), r.sigma_max);
  }

  if (r.identifiable.pass) {
    // One kernel check per distinct union.
    std::map<Support, std::size_t> first;
    std::vector<std::size_t> todo;
    for (const auto& ps : r.per_pair) {
      if (first.emplace(ps.union_support, ps.pair_index).second) todo.push_back(ps.pair_index);
    }
    r.kernel.resize(todo.size());
    parallel_for(todo.size(), options.jobs, [&](std::size_t i) {
      r.kernel[i].pair_index = todo[i];
      r.kernel[i].check = kernel_characterization_check(A, r.per_pair[todo[i]].union_support, topo);
    });
  }
  return r;
}

}  // namespace liftcert
