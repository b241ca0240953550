#pragma once

#include "empmin/core.hpp"

#include <vector>

namespace empmin::quadrature {

struct Rule1d {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss rule for the measure with three-term recurrence
///   p_{k+1}(t) = (t - alpha_k) p_k(t) - beta_k p_{k-1}(t),  beta_0 = total mass.
/// Golub-Welsch eigen-decomposition of the Jacobi matrix, followed by Newton
/// polishing of the nodes and Christoffel-formula weights.
Rule1d gauss_from_recurrence(const std::vector<double>& alpha, const std::vector<double>& beta);

/// Gauss-Legendre on [-1, 1].
Rule1d gauss_legendre(int n);

/// Gauss-Hermite rule for E[f(Z)], Z ~ N(0, 1): sum w_i f(x_i), weights sum to 1.
Rule1d gauss_hermite(int n);

/// Half-range Gauss-Hermite: sum w_i f(t_i) ~ int_0^inf f(t) exp(-t^2) dt.
/// Recurrence coefficients come from a discretized Stieltjes procedure.
Rule1d half_range_hermite(int n);

/// Composite rule for E[f(Z)], Z ~ N(0, 1), split at the sorted `breakpoints`
/// so that integrands with kinks there are integrated piece by piece: the two
/// tails use half-range Gauss-Hermite, interior segments Gauss-Legendre.
/// With no breakpoints this is plain Gauss-Hermite.
Rule1d gaussian_rule_1d(int n, std::vector<double> breakpoints = {});

/// Weighted nodes for E[f(Z)] with Z ~ N(0, I_q); nodes are columns.
struct RuleNd {
  Matrix nodes;
  std::vector<double> weights;
};

/// Tensor product of `n`-point Gauss-Hermite rules in q dimensions (n^q nodes).
RuleNd tensor_gauss_hermite(int q, int n);

/// Lift a one-dimensional rule to RuleNd with q = 1.
RuleNd as_rule_nd(const Rule1d& rule);

}  // namespace empmin::quadrature
