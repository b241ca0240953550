#include "empmin/experiments.hpp"

#include "empmin/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace empmin::experiments {

objectives::FamilyPtr problem_family(const Problem& problem) {
  return std::visit(
      [](const auto& p) -> objectives::FamilyPtr {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IsProblem>)
          return objectives::make_is_family(p.option);
        else if constexpr (std::is_same_v<T, NnProblem>)
          return objectives::make_nn_family(p.mlp, p.dataset);
        else
          return objectives::make_quadratic_family(measures::dimension(p.law));
      },
      problem);
}

measures::DistributionSpec problem_law(const Problem& problem) {
  return std::visit(
      [](const auto& p) -> measures::DistributionSpec {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IsProblem>)
          return measures::StandardGaussian{p.option.dim()};
        else if constexpr (std::is_same_v<T, NnProblem>)
          return measures::uniform_on(p.dataset);
        else
          return p.law;
      },
      problem);
}

Index decision_dim(const Problem& problem) { return problem_family(problem)->decision_dim(); }
Index noise_dim(const Problem& problem) { return measures::dimension(problem_law(problem)); }

int default_quadrature_nodes(Index q) {
  if (q == 1) return 200;
  if (q == 2) return 64;
  return 32;
}

namespace {

constexpr double kKinkRange = 12.0;
// nodes per half-line and per segment along the kink direction when q >= 2
constexpr int kInnerNodes = 100;

/// Zeros of t -> basket(base + t u) - K on [-12, 12]: the payoff kinks along
/// the line. Sign changes on a 0.125 grid, refined by bisection.
std::vector<double> kinks_along(const payoffs::BasketOptionSpec& option, const Vector& base, const Vector& u) {
  auto f = [&](double t) -> double { return payoffs::basket_value(option, base + t * u) - option.K; };
  std::vector<double> roots;
  const int steps = static_cast<int>(2.0 * kKinkRange / 0.125);
  double a = -kKinkRange, fa = f(a);
  for (int k = 1; k <= steps; ++k) {
    const double b = -kKinkRange + 0.125 * k, fb = f(b);
    if ((fa < 0.0) != (fb < 0.0)) {
      double lo = a, hi = b, flo = fa;
      for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi), fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    a = b;
    fa = fb;
  }
  return roots;
}

/// Quadrature for E[f(Z)], Z ~ N(0, I_q), adapted to the payoff kink. Z is
/// written as t u + Q w with u the basket gradient direction at the origin and
/// Q an orthonormal complement. w runs over a tensor Gauss-Hermite rule in
/// q - 1 dimensions; for each outer node the integral over t is split at the
/// kinks of the payoff on that line (and at 0), so the outer integrand is
/// smooth and plain Gauss-Hermite converges quickly on it.
quadrature::RuleNd is_rule(const payoffs::BasketOptionSpec& option, int outer_nodes, int inner_nodes) {
  const Index q = option.dim();
  if (q > 3) throw std::invalid_argument("reference: quadrature is limited to q <= 3");
  if (q == 1) {
    auto kinks = payoffs::kink_points_1d(option);
    kinks.push_back(0.0);
    return quadrature::as_rule_nd(quadrature::gaussian_rule_1d(inner_nodes, kinks));
  }

  Vector u = option.sigma.transpose() * option.a.cwiseProduct(option.s0);
  if (!(u.norm() > 0.0)) u = Vector::Unit(q, 0);
  u.normalize();
  const Matrix H = Eigen::HouseholderQR<Matrix>(u).householderQ();
  const Matrix Q = H.rightCols(q - 1);

  const auto outer = quadrature::tensor_gauss_hermite(static_cast<int>(q - 1), outer_nodes);
  std::vector<Vector> cols;
  std::vector<double> weights;
  for (Index k = 0; k < outer.nodes.cols(); ++k) {
    const Vector base = Q * outer.nodes.col(k);
    auto kinks = kinks_along(option, base, u);
    kinks.push_back(0.0);
    const auto inner = quadrature::gaussian_rule_1d(inner_nodes, kinks);
    for (std::size_t j = 0; j < inner.nodes.size(); ++j) {
      const double w = outer.weights[static_cast<std::size_t>(k)] * inner.weights[j];
      if (w == 0.0) continue;
      cols.push_back(base + inner.nodes[j] * u);
      weights.push_back(w);
    }
  }
  quadrature::RuleNd rule;
  rule.nodes.resize(q, static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) rule.nodes.col(static_cast<Index>(i)) = cols[i];
  rule.weights = std::move(weights);
  return rule;
}

}  // namespace

PopulationObjective::PopulationObjective(const Problem& problem, int nodes_per_axis) {
  dim_ = decision_dim(problem);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, IsProblem>) {
          const int nodes = nodes_per_axis > 0 ? nodes_per_axis : default_quadrature_nodes(p.option.dim());
          auto rule = is_rule(p.option, nodes, p.option.dim() == 1 ? nodes : kInnerNodes);
          weighted_.emplace(objectives::make_is_family(p.option), std::move(rule.nodes), std::move(rule.weights));
        } else if constexpr (std::is_same_v<T, NnProblem>) {
          weighted_.emplace(objectives::EmpiricalObjective(objectives::make_nn_family(p.mlp, p.dataset), p.dataset));
        } else {
          measures::validate(p.law);
          const Index q = measures::dimension(p.law);
          std::visit(
              [&](const auto& law) {
                using L = std::decay_t<decltype(law)>;
                if constexpr (std::is_same_v<L, measures::StandardGaussian>) {
                  mean_ = Vector::Zero(q);
                  trace_ = static_cast<double>(q);
                } else if constexpr (std::is_same_v<L, measures::UniformCube>) {
                  mean_ = Vector::Constant(q, 0.5);
                  trace_ = static_cast<double>(q) / 12.0;
                } else {
                  mean_ = Vector::Zero(q);
                  for (Index i = 0; i < law.atoms.cols(); ++i) mean_ += law.weights[static_cast<std::size_t>(i)] * law.atoms.col(i);
                  trace_ = 0.0;
                  for (Index i = 0; i < law.atoms.cols(); ++i)
                    trace_ += law.weights[static_cast<std::size_t>(i)] * (law.atoms.col(i) - mean_).squaredNorm();
                }
              },
              p.law);
        }
      },
      problem);
}

double PopulationObjective::value(const Vector& x) const {
  if (weighted_) return weighted_->value(x);
  if (x.size() != dim_) throw std::invalid_argument("population objective: x has wrong dimension");
  return (x - mean_).squaredNorm() + trace_;
}

Vector PopulationObjective::gradient(const Vector& x) const {
  if (weighted_) return weighted_->gradient(x);
  if (x.size() != dim_) throw std::invalid_argument("population objective: x has wrong dimension");
  return 2.0 * (x - mean_);
}

std::size_t PopulationObjective::node_count() const noexcept {
  return weighted_ ? static_cast<std::size_t>(weighted_->sample_count()) : 0;
}

std::string to_string(ReferenceMethod m) {
  switch (m) {
    case ReferenceMethod::quadrature_newton:
      return "quadrature+newton";
    case ReferenceMethod::closed_form:
      return "closed-form";
    case ReferenceMethod::discrete_exact:
      return "discrete-exact";
  }
  return "unknown";
}

ReferenceSolution reference_minimum(const Problem& problem, const ReferenceOptions& opts) {
  ReferenceSolution ref;
  if (const auto* p = std::get_if<QuadraticProblem>(&problem)) {
    PopulationObjective pop(*p);
    ref.x_star = pop.quadratic_mean();
    ref.v_star = pop.quadratic_trace();
    ref.method = std::holds_alternative<measures::Discrete>(p->law) ? ReferenceMethod::discrete_exact
                                                                    : ReferenceMethod::closed_form;
    ref.grad_norm = 0.0;
    return ref;
  }

  if (const auto* p = std::get_if<IsProblem>(&problem)) {
    const int nodes = opts.nodes_per_axis > 0 ? opts.nodes_per_axis : default_quadrature_nodes(p->option.dim());
    PopulationObjective pop(problem, nodes);
    const auto& obj = *pop.weighted();
    optim::MinimizeOptions newton;
    newton.method = optim::Method::newton;
    newton.grad_tol = 1e-12;
    newton.max_iters = 200;
    auto res = optim::minimize(obj, Vector::Zero(pop.dim()), newton);
    // At V ~ 1e2..1e3 an absolute 1e-12 gradient is close to rounding; a few
    // extra pure Newton steps settle the last bits.
    Vector x = res.x_star;
    Vector g = obj.gradient(x);
    for (int it = 0; it < 5 && g.norm() > 1e-12; ++it) {
      const Vector step = obj.hessian(x).llt().solve(g);
      const Vector xn = x - step;
      const Vector gn = obj.gradient(xn);
      if (!(gn.norm() < g.norm())) break;
      x = xn;
      g = gn;
    }
    ref.x_star = x;
    ref.v_star = obj.value(x);
    ref.grad_norm = g.norm();
    ref.method = ReferenceMethod::quadrature_newton;
    ref.quadrature_nodes = pop.node_count();
    if (ref.grad_norm > 1e-9)
      throw std::runtime_error("reference_minimum: Newton did not reach |grad V| <= 1e-9 (got " +
                               std::to_string(ref.grad_norm) + ")");
    return ref;
  }

  const auto& p = std::get<NnProblem>(problem);
  PopulationObjective pop(problem);
  const auto& obj = *pop.weighted();
  auto res = optim::minimize(obj, Vector::Zero(pop.dim()), opts.nn_optimizer);
  ref.x_star = res.x_star;
  ref.v_star = res.value;
  ref.grad_norm = res.grad_norm;
  ref.method = ReferenceMethod::discrete_exact;
  ref.quadrature_nodes = static_cast<std::size_t>(p.dataset.size());
  return ref;
}

LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw std::invalid_argument("fit_loglog_slope: need at least 4 points");
  std::vector<double> lx, ly;
  for (const auto& [n, err] : points) {
    if (!(n > 0.0)) throw std::invalid_argument("fit_loglog_slope: n must be positive");
    if (!(err > 0.0)) throw std::invalid_argument("fit_loglog_slope: errors must be positive");
    lx.push_back(std::log(n));
    ly.push_back(std::log(err));
  }
  const double m = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_loglog_slope: n values must not all coincide");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace empmin::experiments
