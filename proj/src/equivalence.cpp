#include "liftcert/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "liftcert/errors.hpp"

namespace liftcert {

namespace {

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void require_class(const ParamTuple& h, const char* which) {
  int k = h.first_zero_factor();
  if (k >= 0) {
    throw ZeroFactorError(std::string(which) + " is not in h𝒮* (factor " + std::to_string(k + 1) +
                          " is zero)");
  }
}

// ||h - diag(signs) g||_p with signs applied per factor.
double signed_distance(const ParamTuple& h, const ParamTuple& g, const std::vector<int>& signs,
                       NormOrder p) {
  std::vector<double> diff;
  diff.reserve(static_cast<std::size_t>(h.K()) * h.S());
  for (int k = 0; k < h.K(); ++k) {
    auto a = h.factor(k);
    auto b = g.factor(k);
    for (std::size_t j = 0; j < a.size(); ++j) diff.push_back(a[j] - signs[k] * b[j]);
  }
  return vector_norm(diff, p);
}

}  // namespace

bool bound_holds(double lhs, double rhs) {
  return lhs <= rhs * (1.0 + kBoundRelTol) + kBoundAbsTol;
}

BoundReport make_report(double lhs, double rhs, bool precondition_met) {
  BoundReport r;
  r.lhs = lhs;
  r.rhs = rhs;
  r.precondition_met = precondition_met;
  r.satisfied = precondition_met && bound_holds(lhs, rhs);
  return r;
}

DiagRepresentative normalize_diag(const ParamTuple& h) {
  require_class(h, "tuple");
  const int K = h.K();
  // Geometric mean in log space keeps extreme scales finite.
  double log_mu = 0.0;
  std::vector<double> norms(K);
  for (int k = 0; k < K; ++k) {
    norms[k] = inf_norm(h.factor(k));
    log_mu += std::log(norms[k]);
  }
  const double mu = std::exp(log_mu / K);
  ParamTuple out = h;
  int sign_carry = 1;
  for (int k = 0; k < K; ++k) {
    double lambda = mu / norms[k];
    auto f = out.factor(k);
    if (k > 0) {
      auto lead = std::find_if(f.begin(), f.end(), [](double x) { return x != 0.0; });
      if (*lead < 0.0) {
        lambda = -lambda;
        sign_carry = -sign_carry;
      }
    }
    for (double& x : f) x *= lambda;
  }
  if (sign_carry < 0) {
    for (double& x : out.factor(0)) x = -x;
  }
  return {std::move(out), mu};
}

double dp_dist(const ParamTuple& h, const ParamTuple& g, NormOrder p) {
  if (h.K() != g.K() || h.S() != g.S()) throw ShapeError("tuples differ in (K, S)");
  require_class(g, "second tuple");
  const ParamTuple hn = normalize_diag(h).tuple;
  const ParamTuple gn = normalize_diag(g).tuple;
  const int K = h.K();
  double best = std::numeric_limits<double>::infinity();
  // Sign patterns on factors 2..K; factor 1 takes the product so it stays 1.
  std::vector<int> signs(K, 1);
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << (K - 1)); ++mask) {
    int prod = 1;
    for (int k = 1; k < K; ++k) {
      signs[k] = (mask >> (k - 1)) & 1U ? -1 : 1;
      prod *= signs[k];
    }
    signs[0] = prod;
    best = std::min(best, signed_distance(hn, gn, signs, p));
  }
  return best;
}

bool same_class(const ParamTuple& h, const ParamTuple& g, NormOrder p) {
  return dp_dist(h, g, p) < 1e-10 * (h.norm(p) + g.norm(p));
}

double network_dist(const ParamTuple& h, const ParamTuple& g, NormOrder p,
                    const NetworkTopology& topo) {
  if (topo.paths().size() == 0) throw std::invalid_argument("network has no paths");
  double acc = 0.0;
  for (std::size_t i = 0; i < topo.paths().size(); ++i) {
    const auto& path = topo.paths()[i];
    ParamTuple hp = path_restriction(h, topo, path);
    ParamTuple gp = path_restriction(g, topo, path);
    if (!hp.nonzero_class() || !gp.nonzero_class()) {
      throw ZeroFactorError("path " + std::to_string(i) + " restriction is not in h𝒮*");
    }
    double d = dp_dist(hp, gp, p);
    if (p.is_inf()) {
      acc = std::max(acc, d);
    } else {
      acc += std::pow(d, p.value());
    }
  }
  return p.is_inf() ? acc : std::pow(acc, 1.0 / p.value());
}

double inverse_stability_factor(int K, int S, NormOrder p, double sup_a, double sup_b) {
  const double e = 1.0 / K - 1.0;
  return 7.0 * std::pow(static_cast<double>(K) * S, p.reciprocal()) *
         std::min(std::pow(sup_a, e), std::pow(sup_b, e));
}

BoundReport theorem1_check(const ParamTuple& h, const ParamTuple& g, NormOrder p, NormOrder q) {
  const double lhs = dp_dist(h, g, p);
  const TensorK Ph = segre(h);
  const TensorK Pg = segre(g);
  const TensorK diff = Ph - Pg;
  const double sup_h = tensor_norm(Ph, NormOrder::inf());
  const double sup_g = tensor_norm(Pg, NormOrder::inf());
  const double rhs = inverse_stability_factor(h.K(), h.S(), p, sup_h, sup_g) * tensor_norm(diff, q);
  const bool pre = tensor_norm(diff, NormOrder::inf()) <= 0.5 * std::max(sup_h, sup_g);
  return make_report(lhs, rhs, pre);
}

BoundReport theorem2_check(const ParamTuple& h, const ParamTuple& g, NormOrder q) {
  const TensorK Ph = segre(h);
  const TensorK Pg = segre(g);
  const double lhs = tensor_norm(Ph - Pg, q);
  const int K = h.K();
  const double rq = q.reciprocal();
  const double e = 1.0 - 1.0 / K;
  const double sup = std::max(std::pow(tensor_norm(Ph, NormOrder::inf()), e),
                              std::pow(tensor_norm(Pg, NormOrder::inf()), e));
  const double rhs = std::pow(static_cast<double>(h.S()), (K - 1) * rq) *
                     std::pow(static_cast<double>(K), 1.0 - rq) * sup * dp_dist(h, g, q);
  return make_report(lhs, rhs, true);
}

}  // namespace liftcert
