#include "empmin/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace empmin::experiments {

Lemma1Report lemma1_check(const Problem& problem, std::size_t n, std::uint64_t seed, std::vector<Vector> theta_grid,
                          const optim::MinimizeOptions& opts, const std::optional<ReferenceSolution>& reference) {
  const auto ref = reference ? *reference : reference_minimum(problem);
  const PopulationObjective pop(problem);
  const objectives::EmpiricalObjective obj(problem_family(problem), measures::sample_iid(problem_law(problem), n, seed));

  auto o = opts;
  if (!obj.family().has_hessian()) o.method = optim::Method::gradient_descent;
  const auto res = optim::minimize(obj, Vector::Zero(obj.dim()), o);

  // Theta must contain both x* and X_n*.
  theta_grid.push_back(ref.x_star);
  theta_grid.push_back(res.x_star);

  Lemma1Report rep;
  rep.x_n_star = res.x_star;
  rep.lhs = std::abs(res.value - ref.v_star);
  for (const auto& x : theta_grid) {
    if (x.size() != obj.dim()) throw std::invalid_argument("lemma1_check: grid point has wrong dimension");
    rep.rhs = std::max(rep.rhs, std::abs(obj.value(x) - pop.value(x)));
  }
  rep.grid_size = theta_grid.size();
  rep.holds = rep.lhs <= rep.rhs + 1e-10;
  return rep;
}

}  // namespace empmin::experiments
