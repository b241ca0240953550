#pragma once

#include "empmin/core.hpp"
#include "empmin/objectives.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace empmin::optim {

enum class Method { newton, gradient_descent };

struct ArmijoOptions {
  double c = 1e-4;
  double shrink = 0.5;
  double initial_step = 1.0;
  bool operator==(const ArmijoOptions&) const = default;
};

struct MinimizeOptions {
  std::size_t max_iters = 500;
  double grad_tol = 1e-8;
  Method method = Method::newton;
  ArmijoOptions armijo;
  /// Number of starts. Start 0 is x0; further starts are uniform in
  /// [-start_box_radius, start_box_radius]^d drawn from `seed`.
  std::size_t multistart = 1;
  double start_box_radius = 1.0;
  std::uint64_t seed = 0;
  bool record_trace = false;
  bool operator==(const MinimizeOptions&) const = default;
};

void validate(const MinimizeOptions& opts);

struct MinimizeResult {
  Vector x_star;
  double value = 0.0;
  double grad_norm = 0.0;
  std::size_t iters = 0;
  bool converged = false;
  std::size_t start_index = 0;
  std::vector<std::pair<std::size_t, double>> trace;
};

/// Minimize a sample average from x0. Newton uses the analytic Hessian with a
/// Levenberg ridge on factorization failure; both methods backtrack with the
/// Armijo rule, and an ExponentOverflow during the line search only shrinks
/// the step. The returned value is re-evaluated at x_star.
///
/// Throws std::invalid_argument for non-finite x0 or invalid options, and
/// std::logic_error when Newton is requested for a family without Hessian.
MinimizeResult minimize(const objectives::WeightedObjective& obj, const Vector& x0, const MinimizeOptions& opts);

/// Hessian of the importance-sampling sample average,
///   (1/n) sum phi^2(Z_i) e^{-<x,Z_i> + |x|^2/2} (I + (x - Z_i)(x - Z_i)^T).
/// Throws std::invalid_argument for any other family.
Matrix hessian_is(const objectives::WeightedObjective& obj, const Vector& x);

}  // namespace empmin::optim
