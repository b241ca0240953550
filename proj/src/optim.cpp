#include "empmin/optim.hpp"

#include "empmin/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace empmin::optim {

void validate(const MinimizeOptions& opts) {
  if (!(opts.grad_tol > 0.0)) throw std::invalid_argument("minimize: grad_tol must be positive");
  if (!(opts.armijo.c > 0.0 && opts.armijo.c < 1.0)) throw std::invalid_argument("minimize: armijo c must lie in (0, 1)");
  if (!(opts.armijo.shrink > 0.0 && opts.armijo.shrink < 1.0))
    throw std::invalid_argument("minimize: armijo shrink must lie in (0, 1)");
  if (!(opts.armijo.initial_step > 0.0)) throw std::invalid_argument("minimize: initial step must be positive");
  if (opts.multistart < 1) throw std::invalid_argument("minimize: multistart must be >= 1");
  if (!(opts.start_box_radius > 0.0)) throw std::invalid_argument("minimize: start_box_radius must be positive");
}

namespace {

constexpr int kMaxBacktracks = 60;

Vector newton_direction(const objectives::WeightedObjective& obj, const Vector& x, const Vector& g) {
  const Matrix H = obj.hessian(x);
  const double scale = std::max(H.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  double tau = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Matrix M = H;
    M.diagonal().array() += tau;
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() == Eigen::Success) {
      Vector p = -llt.solve(g);
      if (p.allFinite() && p.dot(g) < 0.0) return p;
    }
    tau = tau == 0.0 ? 1e-10 * scale : 10.0 * tau;
  }
  return -g;
}

MinimizeResult run_single(const objectives::WeightedObjective& obj, const Vector& x0, const MinimizeOptions& opts) {
  MinimizeResult res;
  Vector x = x0;
  Vector g;
  double f = obj.value_and_gradient(x, g);
  if (!std::isfinite(f)) throw std::domain_error("minimize: objective is not finite at the start point");
  if (opts.record_trace) res.trace.emplace_back(0, f);

  double last_step = opts.armijo.initial_step;
  std::size_t it = 0;
  for (; it < opts.max_iters; ++it) {
    if (g.norm() <= opts.grad_tol) break;
    const Vector p = opts.method == Method::newton ? newton_direction(obj, x, g) : Vector(-g);
    const double slope = g.dot(p);

    // Gradient descent restarts from twice the last accepted step so that a
    // well-scaled problem does not pay for the full backtrack each iteration.
    double t = opts.method == Method::newton ? opts.armijo.initial_step
                                              : std::min(opts.armijo.initial_step, 2.0 * last_step);
    bool accepted = false;
    Vector x_new, g_new;
    double f_new = f;
    for (int bt = 0; bt < kMaxBacktracks; ++bt, t *= opts.armijo.shrink) {
      x_new = x + t * p;
      try {
        f_new = obj.value(x_new);
      } catch (const ExponentOverflow&) {
        continue;
      }
      if (!std::isfinite(f_new)) continue;
      if (f_new <= f + opts.armijo.c * t * slope) {
        accepted = true;
        break;
      }
      // Near the optimum the predicted decrease drops below the rounding
      // error of f and the value test turns into noise. There the gradient
      // norm decides: accept a step that reduces it while f stays within a
      // few ulps.
      if (f_new <= f + 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f))) {
        const Vector gt = obj.gradient(x_new);
        if (gt.norm() < g.norm()) {
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;
    last_step = t;
    x = std::move(x_new);
    f = obj.value_and_gradient(x, g);
    if (opts.record_trace) res.trace.emplace_back(it + 1, f);
  }
  res.x_star = x;
  res.value = obj.value(x);
  res.grad_norm = g.norm();
  res.iters = it;
  res.converged = res.grad_norm <= opts.grad_tol;
  return res;
}

}  // namespace

MinimizeResult minimize(const objectives::WeightedObjective& obj, const Vector& x0, const MinimizeOptions& opts) {
  validate(opts);
  if (x0.size() != obj.dim()) throw std::invalid_argument("minimize: x0 has wrong dimension");
  if (!x0.allFinite()) throw std::invalid_argument("minimize: x0 must be finite");
  if (opts.method == Method::newton && !obj.family().has_hessian())
    throw std::logic_error("minimize: newton requires an analytic Hessian (" + obj.family().name() + ")");

  MinimizeResult best = run_single(obj, x0, opts);
  if (opts.multistart == 1) return best;

  Rng rng(opts.seed);
  const Index d = obj.dim();
  for (std::size_t s = 1; s < opts.multistart; ++s) {
    Vector start(d);
    for (Index k = 0; k < d; ++k) start[k] = opts.start_box_radius * (2.0 * rng.uniform() - 1.0);
    MinimizeResult r = run_single(obj, start, opts);
    r.start_index = s;
    if (r.value < best.value - 1e-12) best = std::move(r);
  }
  return best;
}

Matrix hessian_is(const objectives::WeightedObjective& obj, const Vector& x) {
  if (dynamic_cast<const objectives::ImportanceSamplingFamily*>(&obj.family()) == nullptr)
    throw std::invalid_argument("hessian_is: objective is not an importance-sampling family");
  return obj.hessian(x);
}

}  // namespace empmin::optim
