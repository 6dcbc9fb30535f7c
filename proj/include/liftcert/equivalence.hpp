#pragma once

// Metrics between classes of parameter tuples under per-factor rescaling with
// unit product, and evaluators for the distortion inequalities relating those
// metrics to the Segre embedding.

#include <string>

#include "liftcert/network.hpp"
#include "liftcert/norm_order.hpp"
#include "liftcert/tensor.hpp"

namespace liftcert {

/// Representative of [h] whose factors all have infinity norm `common_inf_norm`.
struct DiagRepresentative {
  ParamTuple tuple;
  double common_inf_norm = 0.0;
};

/// Outcome of evaluating an inequality lhs <= rhs under a precondition.
struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool precondition_met = false;
  /// Only meaningful when precondition_met; false otherwise.
  bool satisfied = false;

  double slack() const { return rhs - lhs; }
  bool violated() const { return precondition_met && !satisfied; }
};

/// Relative and absolute slack used when declaring an inequality satisfied.
inline constexpr double kBoundRelTol = 1e-9;
inline constexpr double kBoundAbsTol = 1e-12;

/// lhs <= rhs * (1 + 1e-9) + 1e-12.
bool bound_holds(double lhs, double rhs);
BoundReport make_report(double lhs, double rhs, bool precondition_met);

/// Rescales h (product of scalings one) so every factor has infinity norm
/// mu = (prod_k ||h_k||_inf)^(1/K). For k >= 2 the first nonzero entry of
/// factor k is made positive; the compensating sign goes to factor 1.
/// Throws ZeroFactorError if some factor vanishes.
DiagRepresentative normalize_diag(const ParamTuple& h);

/// Quotient distance d_p([h], [g]): the infimum of ||h' - g'||_p over
/// equal-infinity-norm representatives. Representatives are unique up to
/// signs with unit product, so the infimum is a minimum over 2^(K-1) relative
/// sign patterns applied to the normalized tuples.
double dp_dist(const ParamTuple& h, const ParamTuple& g, NormOrder p);

/// True iff dp_dist(h, g) < 1e-10 (||h||_p + ||g||_p).
bool same_class(const ParamTuple& h, const ParamTuple& g, NormOrder p);

/// Network class distance: (sum over paths of d_p(h^p, g^p)^p)^(1/p), the
/// maximum for p = inf. Throws ZeroFactorError when a path restriction has a
/// zero factor.
double network_dist(const ParamTuple& h, const ParamTuple& g, NormOrder p,
                    const NetworkTopology& topo);

/// d_p([h],[g]) <= 7 (KS)^(1/p) min(||P(h)||_inf^(1/K-1), ||P(g)||_inf^(1/K-1))
///                 ||P(h) - P(g)||_q,
/// asserted when ||P(g) - P(h)||_inf <= max(||P(h)||_inf, ||P(g)||_inf) / 2.
BoundReport theorem1_check(const ParamTuple& h, const ParamTuple& g, NormOrder p, NormOrder q);

/// ||P(h) - P(g)||_q <= S^((K-1)/q) K^(1-1/q)
///                      max(||P(h)||_inf^(1-1/K), ||P(g)||_inf^(1-1/K)) d_q([h],[g]),
/// unconditional.
BoundReport theorem2_check(const ParamTuple& h, const ParamTuple& g, NormOrder q);

/// Inverse-stability constant 7 (KS)^(1/p) min(a, b)^(1/K - 1) shared by the
/// rank-one and recovery bounds (a, b are Segre sup-norms).
double inverse_stability_factor(int K, int S, NormOrder p, double sup_a, double sup_b);

}  // namespace liftcert
