#pragma once

// Stability constants of a lifting operator with respect to a support family,
// and evaluators for the recovery bounds they certify.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "liftcert/equivalence.hpp"
#include "liftcert/lifting.hpp"
#include "liftcert/network.hpp"
#include "liftcert/spectral.hpp"
#include "liftcert/tensor.hpp"

namespace liftcert {

/// Spectrum of A restricted to the union of one unordered pair of members.
struct PairSpectrum {
  std::size_t pair_index = 0;
  std::size_t member_a = 0;
  std::size_t member_b = 0;
  Support union_support;
  std::size_t cube_columns = 0;
  SpectralSummary summary;
};

/// All unordered pairs (a <= b) in order a = 0.., b = a..; pairs with equal
/// unions share one SVD.
std::vector<PairSpectrum> pair_spectra(const LiftingOperator& A, const SupportFamily& family,
                                       int jobs = 1);

struct NspPairResult {
  std::size_t pair_index = 0;
  bool pass = false;  // restricted columns have full rank
  bool indeterminate = false;
};

/// Sufficient null-space check: ker A meets the (S u S')-tensors only at 0
/// for every pair. On success the constants are (gamma, rho) = (1, inf).
struct NspResult {
  std::vector<NspPairResult> per_pair;
  bool all_pass = false;
  std::optional<double> gamma;
  std::optional<double> rho;
};

NspResult sufficient_nsp_check(const std::vector<PairSpectrum>& spectra);
NspResult sufficient_nsp_check(const LiftingOperator& A, const SupportFamily& family, int jobs = 1);

/// sigma = min over pairs of the smallest nonzero singular value of A_{S u S'}.
struct LowerRipResult {
  double sigma = 0.0;
  std::vector<PairSpectrum> per_pair;
};

/// Throws std::domain_error("empty operator for pair ...") when some
/// restricted operator is identically zero.
LowerRipResult deep_lower_rip(std::vector<PairSpectrum> spectra);
LowerRipResult deep_lower_rip(const LiftingOperator& A, const SupportFamily& family, int jobs = 1);

/// Closed form sqrt(N) for single-path networks passing the {0,1} test.
struct SinglePathSigma {
  bool applicable = false;
  double sigma = 0.0;
  double gamma = 1.0;
  double rho = 0.0;  // +inf when applicable
  std::string reason;
};

SinglePathSigma single_path_sigma(const NetworkTopology& topo);
SinglePathSigma single_path_sigma(const NetworkTopology& topo, const SupportFamily& family);

/// Largest singular value of A.
double spectral_radius(const LiftingOperator& A);

/// gamma = C S^((K-1)/2) sqrt(K) sigma_max of the converse statement; the
/// matching rho is the noise level delta.
double converse_gamma(double C, int S, int K, double sigma_max);

struct Theorem3Reports {
  BoundReport tensor;  // ||P(h*) - P(hbar)||_2 <= gamma/sigma (delta + eta)
  BoundReport dp;      // d_p([h*], [hbar]) bound
};

/// Recovery bounds under the null-space property with constants (gamma, rho)
/// and lower-RIP constant sigma. The tensor bound is gated on
/// delta + eta <= rho; the d_p bound additionally on
/// gamma/sigma (delta + eta) <= max(||P(h*)||_inf, ||P(hbar)||_inf) / 2.
Theorem3Reports theorem3_certificate(const ParamTuple& hbar, const ParamTuple& hstar, double delta,
                                     double eta, double gamma, double rho, double sigma,
                                     NormOrder p);

struct Theorem7Report {
  BoundReport bound;
  double eps = 0.0;  // min over edges of ||T_e(hbar)||_inf
};

/// Network bound D_p(h*, hbar) <= 7 (KS)^(1/p) / (sqrt(N) eps^(K-1)) (delta + eta).
/// The precondition requires, on every path, the rank-one inversion
/// hypothesis (delta + eta)/sqrt(N) <= max(||P(h*^p)||_inf, ||P(hbar^p)||_inf) / 2.
/// The caller is responsible for the {0,1} identifiability condition.
/// Throws std::domain_error when some edge kernel of hbar vanishes.
Theorem7Report theorem7_certificate(const ParamTuple& hbar, const ParamTuple& hstar, double delta,
                                    double eta, const NetworkTopology& topo, NormOrder p);

/// Smallest edge-kernel infinity norm of h.
double min_edge_kernel_norm(const ParamTuple& h, const NetworkTopology& topo);

struct KernelPairResult {
  std::size_t pair_index = 0;
  KernelCharacterization check;
};

struct CertifyOptions {
  int jobs = 1;
  /// When set, the converse constant is evaluated with this C.
  std::optional<double> converse_C;
};

struct CertificationReport {
  IdentifiabilityResult identifiable;
  DisjointnessResult disjointness;
  NspResult nsp;
  SinglePathSigma single_path;
  /// Certified (gamma, rho); empty when no sufficient condition applies.
  std::optional<double> gamma;
  std::optional<double> rho;
  double sigma_family = 0.0;
  double sigma_max = 0.0;
  std::optional<double> converse_gamma;
  std::vector<PairSpectrum> per_pair;
  /// Filled only when the identifiability test passes.
  std::vector<KernelPairResult> kernel;
  std::optional<std::string> sigma_error;
  std::size_t family_size = 0;

  /// Identifiability, path disjointness, kernel characterization and a
  /// determinate positive sigma.
  bool all_checks_pass() const;
};

CertificationReport certify(const NetworkTopology& topo, const SupportFamily& family,
                            const CertifyOptions& options = {});

}  // namespace liftcert
