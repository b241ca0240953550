#include "empmin/experiments.hpp"

#include "empmin/quadrature.hpp"
#include "empmin/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace empmin::experiments {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

Vector random_vector(Rng& rng, Index d, double scale) {
  Vector v(d);
  for (Index k = 0; k < d; ++k) v[k] = scale * rng.normal();
  return v;
}

double fd_gradient_error(const objectives::WeightedObjective& obj, const Vector& x) {
  const Vector g = obj.gradient(x);
  const double h = 1e-5 * (1.0 + x.norm());
  Vector fd(x.size());
  for (Index k = 0; k < x.size(); ++k) {
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    fd[k] = (obj.value(xp) - obj.value(xm)) / (2.0 * h);
  }
  return (g - fd).norm() / std::max(g.norm(), 1e-12);
}

double fd_hessian_error(const objectives::WeightedObjective& obj, const Vector& x) {
  const Matrix H = obj.hessian(x);
  const double h = 1e-5 * (1.0 + x.norm());
  Matrix fd(x.size(), x.size());
  for (Index k = 0; k < x.size(); ++k) {
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    fd.col(k) = (obj.gradient(xp) - obj.gradient(xm)) / (2.0 * h);
  }
  return (H - fd).norm() / std::max(H.norm(), 1e-12);
}

double brute_force_w1(const measures::EmpiricalMeasure& a, const measures::EmpiricalMeasure& b) {
  std::vector<Index> perm(static_cast<std::size_t>(a.size()));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (Index i = 0; i < a.size(); ++i) c += (a.point(i) - b.point(perm[static_cast<std::size_t>(i)])).norm();
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.size());
}

payoffs::BasketOptionSpec basket_2d() {
  payoffs::BasketOptionSpec s;
  s.r = 0.03;
  s.T = 1.0;
  s.K = 100.0;
  s.sigma = (Matrix(2, 2) << 0.25, 0.05, 0.05, 0.2).finished();
  s.s0 = (Vector(2) << 100.0, 95.0).finished();
  s.a = (Vector(2) << 0.5, 0.5).finished();
  s.flavor = payoffs::Flavor::call;
  return s;
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng(seed);
  const auto atm = payoffs::single_asset(100.0, 100.0, 0.05, 0.2, 1.0, payoffs::Flavor::call);

  {
    double worst = 0.0, worst_h = 0.0;
    for (const auto& spec : {atm, basket_2d()}) {
      objectives::EmpiricalObjective obj(objectives::make_is_family(spec),
                                         measures::sample_iid(measures::StandardGaussian{spec.dim()}, 64, mix64(seed + static_cast<std::uint64_t>(spec.dim()))));
      for (int k = 0; k < 10; ++k) {
        const Vector x = random_vector(rng, spec.dim(), 0.5);
        worst = std::max(worst, fd_gradient_error(obj, x));
        worst_h = std::max(worst_h, fd_hessian_error(obj, x));
      }
    }
    out.push_back({"is-gradient-finite-difference", worst < 1e-5, "max rel err " + fmt(worst)});
    out.push_back({"is-hessian-finite-difference", worst_h < 1e-4, "max rel err " + fmt(worst_h)});
  }
  {
    objectives::MlpSpec mlp{{3, 4, 1}, 0.1};
    Matrix data(4, 16);
    for (Index i = 0; i < data.size(); ++i) data.data()[i] = rng.normal();
    measures::EmpiricalMeasure ds(data);
    objectives::EmpiricalObjective obj(objectives::make_nn_family(mlp, ds), ds);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) worst = std::max(worst, fd_gradient_error(obj, random_vector(rng, mlp.weight_count(), 1.0)));
    out.push_back({"nn-gradient-finite-difference", worst < 1e-4, "max rel err " + fmt(worst)});
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Index q = 1 + k % 3;
      const std::size_t n = 2 + static_cast<std::size_t>(k % 5);
      const auto a = measures::sample_iid(measures::UniformCube{q}, n, mix64(seed + 2 * k));
      const auto b = measures::sample_iid(measures::UniformCube{q}, n, mix64(seed + 2 * k + 1));
      worst = std::max(worst, std::abs(measures::wasserstein1_assignment(a, b) - brute_force_w1(a, b)));
    }
    out.push_back({"w1-assignment-vs-permutations", worst < 1e-10, "max abs diff " + fmt(worst)});
  }
  {
    double worst = 0.0;
    for (int k = 0; k < 10; ++k) {
      const auto a = measures::sample_iid(measures::StandardGaussian{1}, 64, mix64(seed + 100 + 2 * k));
      const auto b = measures::sample_iid(measures::StandardGaussian{1}, 64, mix64(seed + 101 + 2 * k));
      worst = std::max(worst, std::abs(measures::wasserstein1_assignment(a, b) - measures::wasserstein1_sorted_1d(a, b)));
    }
    out.push_back({"w1-assignment-vs-sorted", worst < 1e-10, "max abs diff " + fmt(worst)});
  }
  {
    const double v1 = measures::wasserstein1_to_uniform_1d(measures::EmpiricalMeasure(Matrix::Constant(1, 1, 0.5)));
    const double v2 = measures::wasserstein1_to_uniform_1d(measures::EmpiricalMeasure((Matrix(1, 2) << 0.0, 1.0).finished()));
    const double err = std::max(std::abs(v1 - 0.25), std::abs(v2 - 0.25));
    out.push_back({"w1-to-uniform-examples", err < 1e-15, "max abs diff " + fmt(err)});
  }
  {
    double worst = 0.0;
    for (double K : {80.0, 100.0, 130.0})
      for (auto fl : {payoffs::Flavor::call, payoffs::Flavor::put}) {
        const auto spec = payoffs::single_asset(100.0, K, 0.05, 0.2, 1.0, fl);
        const auto rule = quadrature::gaussian_rule_1d(200, payoffs::kink_points_1d(spec));
        double q = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
          q += rule.weights[i] * payoffs::payoff_eval(spec, Vector::Constant(1, rule.nodes[i]));
        const double p = payoffs::bs_price_1d(spec);
        worst = std::max(worst, std::abs(q - p) / p);
      }
    out.push_back({"bs-price-vs-quadrature", worst < 1e-8, "max rel err " + fmt(worst)});
  }
  {
    const auto z = measures::sample_iid(measures::StandardGaussian{1}, 100000, mix64(seed + 7));
    const auto st = objectives::translated_stats(atm, Vector::Constant(1, 0.5), z);
    const double price = payoffs::bs_price_1d(atm);
    const double zscore = std::abs(st.mean - price) / st.std_error;
    out.push_back({"translated-estimator-unbiased", zscore < 4.0, "z-score " + fmt(zscore)});
  }
  {
    bool ok = true;
    double lhs_max = 0.0;
    const QuadraticProblem quad{measures::StandardGaussian{2}};
    const auto ref = reference_minimum(quad);
    for (int k = 0; k < 20; ++k) {
      const auto rep = lemma1_check(quad, 10 + k, mix64(seed + 1000 + k), {}, {}, ref);
      ok = ok && rep.holds;
      lhs_max = std::max(lhs_max, rep.lhs);
    }
    out.push_back({"lemma1-quadratic", ok, "max lhs " + fmt(lhs_max)});
  }
  {
    objectives::EmpiricalObjective obj(objectives::make_quadratic_family(3),
                                       measures::sample_iid(measures::StandardGaussian{3}, 50, seed));
    const auto res = optim::minimize(obj, Vector::Zero(3), {});
    const Vector mean = obj.samples().points().rowwise().mean();
    const double err = (res.x_star - mean).norm();
    out.push_back({"newton-quadratic", res.converged && res.iters <= 2 && err < 1e-12,
                   "iters " + std::to_string(res.iters) + ", err " + fmt(err)});
  }
  {
    bool ok = true;
    for (int k = 0; k < 1000; ++k) {
      const auto spec = k % 2 == 0 ? atm : basket_2d();
      const Vector z = random_vector(rng, spec.dim(), 3.0);
      ok = ok && payoffs::payoff_eval(spec, z) >= 0.0;
    }
    out.push_back({"payoff-nonnegative", ok, "1000 random points"});
  }
  return out;
}

}  // namespace empmin::experiments
