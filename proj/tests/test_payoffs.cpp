#include "empmin/payoffs.hpp"
#include "empmin/quadrature.hpp"
#include "empmin/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace empmin;
using namespace empmin::payoffs;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

BasketOptionSpec basket2(Flavor f) {
  BasketOptionSpec s;
  s.r = 0.03;
  s.T = 0.5;
  s.K = 95.0;
  s.sigma.resize(2, 2);
  s.sigma << 0.25, 0.05, 0.05, 0.2;
  s.s0 = vec({100, 90});
  s.a = vec({0.6, 0.4});
  s.flavor = f;
  return s;
}

/// Undiscounted Black-Scholes expectation, written out independently.
double closed_form(double s0, double K, double r, double sigma, double T, Flavor f) {
  const double sd = sigma * std::sqrt(T);
  const double d1 = (std::log(s0 / K) + (r + 0.5 * sigma * sigma) * T) / sd;
  const double d2 = d1 - sd;
  const double fwd = s0 * std::exp(r * T);
  return f == Flavor::call ? fwd * oracle::normal_cdf(d1) - K * oracle::normal_cdf(d2)
                           : K * oracle::normal_cdf(-d2) - fwd * oracle::normal_cdf(-d1);
}

}  // namespace

TEST_CASE("payoff examples") {
  const auto call = single_asset(100, 90, 0.0, 0.2, 1.0, Flavor::call);
  const Vector z0 = Vector::Zero(1);
  CHECK(payoff_eval(call, z0) == doctest::Approx(100.0 * std::exp(-0.02) - 90.0).epsilon(1e-14));
  CHECK(payoff_eval(call, z0) == doctest::Approx(8.01987).epsilon(1e-6));
  const auto put = single_asset(100, 90, 0.0, 0.2, 1.0, Flavor::put);
  CHECK(payoff_eval(put, z0) == 0.0);
  const auto k0 = single_asset(100, 0, 0.05, 0.2, 1.0, Flavor::call);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vector z = vec({4 * rng.normal()});
    CHECK(payoff_eval(k0, z) > 0.0);
    CHECK(payoff_eval(k0, z) == doctest::Approx(basket_value(k0, z)));
  }
}

TEST_CASE("payoff uses row-wise squared entries in the drift") {
  const auto s = basket2(Flavor::call);
  const Vector z = vec({0.3, -0.7});
  double basket = 0.0;
  for (int i = 0; i < 2; ++i) {
    double drift = s.r, diff = 0.0;
    for (int j = 0; j < 2; ++j) {
      drift -= 0.5 * s.sigma(i, j) * s.sigma(i, j);
      diff += s.sigma(i, j) * z(j);
    }
    basket += s.a(i) * s.s0(i) * std::exp(drift * s.T + std::sqrt(s.T) * diff);
  }
  CHECK(basket_value(s, z) == doctest::Approx(basket).epsilon(1e-15));
  CHECK(payoff_eval(s, z) == doctest::Approx(std::max(basket - s.K, 0.0)).epsilon(1e-14));
}

TEST_CASE("payoff invariants on random inputs") {
  Rng rng(11);
  const auto call = basket2(Flavor::call), put = basket2(Flavor::put);
  BasketOptionSpec diag = call;
  diag.sigma << 0.3, 0.0, 0.0, 0.15;
  for (int i = 0; i < 2000; ++i) {
    const Vector z = vec({3 * rng.normal(), 3 * rng.normal()});
    CHECK(payoff_eval(call, z) >= 0.0);
    CHECK(payoff_eval(put, z) >= 0.0);
    CHECK(payoff_eval(put, z) <= put.K);
    for (int j = 0; j < 2; ++j) {
      Vector zp = z;
      zp(j) += 0.1 * rng.uniform();
      CHECK(payoff_eval(diag, zp) >= payoff_eval(diag, z));
    }
  }
}

TEST_CASE("spec validation") {
  auto s = basket2(Flavor::call);
  CHECK_NOTHROW(validate(s));
  auto asym = s;
  asym.sigma(0, 1) += 1e-9;
  CHECK_THROWS_AS(validate(asym), std::invalid_argument);
  auto indefinite = s;
  indefinite.sigma << 0.1, 0.2, 0.2, 0.1;
  CHECK_THROWS_AS(validate(indefinite), std::invalid_argument);
  auto neg_t = s;
  neg_t.T = -1;
  CHECK_THROWS_AS(validate(neg_t), std::invalid_argument);
  auto neg_k = s;
  neg_k.K = -1;
  CHECK_THROWS_AS(validate(neg_k), std::invalid_argument);
  auto dims = s;
  dims.a = vec({1.0});
  CHECK_THROWS_AS(validate(dims), std::invalid_argument);
  CHECK_THROWS_AS(payoff_eval(s, vec({0.0})), std::invalid_argument);
}

TEST_CASE("closed-form price matches independent formula and quadrature on a parameter grid") {
  int combos = 0;
  for (double K : {80.0, 100.0, 130.0})
    for (double sigma : {0.1, 0.25, 0.5})
      for (double T : {0.25, 1.0, 3.0})
        for (Flavor f : {Flavor::call, Flavor::put}) {
          const auto s = single_asset(100, K, 0.05, sigma, T, f);
          const double bs = bs_price_1d(s);
          CHECK(oracle::rel_err(bs, closed_form(100, K, 0.05, sigma, T, f)) < 1e-13);
          // Independent Simpson integration, split at the kink.
          const double kink = (std::log(K / 100.0) - (0.05 - 0.5 * sigma * sigma) * T) / (sigma * std::sqrt(T));
          const double simpson = oracle::gaussian_expectation([&](double z) { return payoff_eval(s, vec({z})); }, {kink});
          CHECK(std::abs(bs - simpson) / bs < 1e-8);
          // The library's kink-aware Gauss-Hermite rule with 200 nodes per half-line.
          const auto rule = quadrature::gaussian_rule_1d(200, kink_points_1d(s));
          double q = 0.0;
          for (std::size_t i = 0; i < rule.nodes.size(); ++i) q += rule.weights[i] * payoff_eval(s, vec({rule.nodes[i]}));
          CHECK(std::abs(bs - q) / bs < 1e-8);
          ++combos;
        }
  CHECK(combos >= 27);
}

TEST_CASE("closed-form price against Monte Carlo and the Jensen bound") {
  const auto s = single_asset(100, 100, 0.05, 0.2, 1.0, Flavor::call);
  const double bs = bs_price_1d(s);
  CHECK(bs >= std::max(100.0 * std::exp(0.05) - 100.0, 0.0));
  Rng rng(2024);
  const int n = 1000000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = payoff_eval(s, vec({rng.normal()}));
    sum += y;
    sq += y * y;
  }
  const double mean = sum / n, se = std::sqrt((sq / n - mean * mean) / (n - 1));
  CHECK(std::abs(mean - bs) < 4.0 * se);
  CHECK_THROWS_AS(bs_price_1d(basket2(Flavor::call)), std::invalid_argument);
}

TEST_CASE("raw Gauss-Hermite on the kinked payoff converges only slowly") {
  // Documents why the pricing oracle splits at the kink.
  const auto s = single_asset(100, 100, 0.05, 0.2, 1.0, Flavor::call);
  const auto gh = quadrature::gauss_hermite(200);
  double q = 0.0;
  for (std::size_t i = 0; i < gh.nodes.size(); ++i) q += gh.weights[i] * payoff_eval(s, vec({gh.nodes[i]}));
  const double err = std::abs(q - bs_price_1d(s)) / bs_price_1d(s);
  CHECK(err < 1e-2);
  CHECK(err > 1e-8);
}

TEST_CASE("growth probe") {
  const auto call = single_asset(100, 100, 0.05, 0.2, 1.0, Flavor::call);
  const std::vector<double> radii{1, 2, 3, 4, 5, 6, 7, 8};
  const auto rep = growth_probe(call, radii, 16, 9);
  CHECK(rep.A >= 0.0);
  CHECK(rep.B >= 0.2 - 0.05);
  CHECK(rep.radii == radii);
  // In one dimension every probe is +-r, so the fit and the held-out
  // violation can be recomputed exactly.
  for (double r : radii)
    for (double sgn : {-1.0, 1.0})
      CHECK(payoff_eval(call, vec({sgn * r})) <= rep.A * std::exp(rep.B * r) * (1 + 1e-12));
  double violation = 0.0;
  std::vector<double> holdout = radii;
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) holdout.push_back(0.5 * (radii[k] + radii[k + 1]));
  for (double r : holdout)
    for (double sgn : {-1.0, 1.0})
      violation = std::max(violation, payoff_eval(call, vec({sgn * r})) - rep.A * std::exp(rep.B * r));
  CHECK(rep.max_violation == doctest::Approx(violation).epsilon(1e-12));

  // Deep OTM: the zero region near the origin contributes nothing.
  const auto otm = single_asset(100, 400, 0.05, 0.2, 1.0, Flavor::call);
  const auto rep2 = growth_probe(otm, radii, 16, 9);
  CHECK(payoff_eval(otm, vec({-8.0})) == 0.0);
  CHECK(rep2.max_violation >= 0.0);

  // Put with a huge strike sits on the plateau K - S ~ K: B close to 0.
  const auto put = single_asset(1, 1e6, 0.05, 0.2, 1.0, Flavor::put);
  const auto rep3 = growth_probe(put, radii, 16, 9);
  CHECK(rep3.B < 1e-3);

  // Basket in two dimensions: held-out random directions are report-only.
  const auto rep4 = growth_probe(basket2(Flavor::call), radii, 32, 4);
  CHECK(rep4.B > 0.0);
  CHECK(rep4.max_violation >= 0.0);
  CHECK(std::isfinite(rep4.max_lipschitz_violation));
}
