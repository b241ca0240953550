#include "empmin/assignment.hpp"
#include "empmin/measures.hpp"
#include "empmin/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace empmin;
using namespace empmin::measures;

namespace {

EmpiricalMeasure values(std::initializer_list<double> v) {
  const std::vector<double> vv(v);
  return EmpiricalMeasure::from_values(vv);
}

Matrix random_points(Rng& rng, Index q, Index n) {
  Matrix m(q, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < q; ++i) m(i, j) = rng.normal();
  return m;
}

}  // namespace

TEST_CASE("single-atom discrete law repeats the atom") {
  Discrete law{Matrix::Constant(1, 1, 5.0), {1.0}};
  const auto m = sample_iid(law, 3, 12345);
  REQUIRE(m.size() == 3);
  for (Index i = 0; i < 3; ++i) CHECK(m.point(i)(0) == 5.0);
}

TEST_CASE("gaussian and uniform sample means") {
  const auto g = sample_iid(StandardGaussian{2}, 1000, 7);
  CHECK(std::abs(g.points().row(0).mean()) < 0.1);
  CHECK(std::abs(g.points().row(1).mean()) < 0.1);
  const auto u = sample_iid(UniformCube{1}, 100000, 1);
  CHECK(std::abs(u.points().row(0).mean() - 0.5) < 0.005);
  CHECK(u.points().minCoeff() >= 0.0);
  CHECK(u.points().maxCoeff() < 1.0);
}

TEST_CASE("sampling is deterministic in the seed") {
  const auto a = sample_iid(StandardGaussian{3}, 50, 99);
  const auto b = sample_iid(StandardGaussian{3}, 50, 99);
  const auto c = sample_iid(StandardGaussian{3}, 50, 100);
  CHECK(a.points() == b.points());
  CHECK(a.points() != c.points());
  CHECK(a.seed() == 99);
}

TEST_CASE("discrete sampling frequencies follow the weights") {
  Matrix atoms(1, 3);
  atoms << 0, 1, 2;
  const auto m = sample_iid(Discrete{atoms, {0.2, 0.5, 0.3}}, 100000, 3);
  std::vector<double> freq(3, 0.0);
  for (Index i = 0; i < m.size(); ++i) freq[static_cast<std::size_t>(m.point(i)(0))] += 1.0 / 100000.0;
  CHECK(freq[0] == doctest::Approx(0.2).epsilon(0.03));
  CHECK(freq[1] == doctest::Approx(0.5).epsilon(0.03));
  CHECK(freq[2] == doctest::Approx(0.3).epsilon(0.03));
}

TEST_CASE("invalid distributions are rejected") {
  Matrix atoms(1, 2);
  atoms << 0, 1;
  CHECK_THROWS_AS(sample_iid(Discrete{atoms, {0.5, 0.6}}, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_iid(Discrete{atoms, {1.5, -0.5}}, 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_iid(StandardGaussian{2}, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(EmpiricalMeasure(Matrix(2, 0)), std::invalid_argument);
}

TEST_CASE("moments") {
  CHECK(moment(values({3, -3}), 2) == doctest::Approx(9.0));
  CHECK(moment(EmpiricalMeasure(Matrix::Zero(2, 1)), 1) == 0.0);
  CHECK(moment(values({1, 2, 3}), 1) == doctest::Approx(2.0));
  Rng rng(5);
  const Matrix p = random_points(rng, 2, 20);
  for (double r : {0.5, 1.0, 2.5}) {
    const double lambda = 2.0;  // power of two: scaling is exact in floating point
    const double base = moment(EmpiricalMeasure(p), r);
    CHECK(moment(EmpiricalMeasure(lambda * p), r) == doctest::Approx(std::pow(lambda, r) * base).epsilon(1e-14));
  }
  CHECK_THROWS_AS(moment(values({1}), 0.0), std::invalid_argument);
}

TEST_CASE("sorted one-dimensional W1 examples") {
  CHECK(wasserstein1_sorted_1d(values({0}), values({1})) == 1.0);
  CHECK(wasserstein1_sorted_1d(values({0, 2}), values({1, 3})) == 1.0);
  CHECK(wasserstein1_sorted_1d(values({3, 1, 2}), values({2, 3, 1})) == 0.0);
  CHECK_THROWS_AS(wasserstein1_sorted_1d(values({0, 1}), values({0})), std::invalid_argument);
  CHECK_THROWS_AS(wasserstein1_sorted_1d(EmpiricalMeasure(Matrix::Zero(2, 1)), EmpiricalMeasure(Matrix::Zero(2, 1))),
                  std::invalid_argument);
}

TEST_CASE("assignment W1 examples") {
  Matrix a(2, 2), b(2, 2);
  a << 0, 1, 0, 1;
  CHECK(wasserstein1_assignment(EmpiricalMeasure(a), EmpiricalMeasure(a)) == 0.0);
  a << 0, 2, 0, 0;
  b << 1, 3, 0, 0;
  CHECK(wasserstein1_assignment(EmpiricalMeasure(a), EmpiricalMeasure(b)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(wasserstein1_assignment(EmpiricalMeasure(a), EmpiricalMeasure(Matrix::Zero(2, 3))),
                  std::invalid_argument);
  CHECK_THROWS_AS(wasserstein1_assignment(EmpiricalMeasure(a), EmpiricalMeasure(Matrix::Zero(3, 2))),
                  std::invalid_argument);
  CHECK_THROWS_AS(wasserstein1_assignment(EmpiricalMeasure(Matrix::Zero(1, 10)), EmpiricalMeasure(Matrix::Zero(1, 10)),
                                          AssignmentOptions{8}),
                  CapExceeded);
}

TEST_CASE("assignment W1 equals permutation brute force") {
  Rng rng(2718);
  for (int trial = 0; trial < 60; ++trial) {
    const Index q = 1 + trial % 3;
    const Index n = 1 + trial % 7;
    const Matrix a = random_points(rng, q, n), b = random_points(rng, q, n);
    const double exact = oracle::w1_brute_force(a, b);
    CHECK(std::abs(wasserstein1_assignment(EmpiricalMeasure(a), EmpiricalMeasure(b)) - exact) < 1e-10);
  }
}

TEST_CASE("assignment and sorted W1 agree in one dimension") {
  Rng rng(31);
  for (Index n : {1, 2, 8, 33, 128, 512}) {
    const Matrix a = random_points(rng, 1, n), b = random_points(rng, 1, n);
    CHECK(std::abs(wasserstein1_assignment(EmpiricalMeasure(a), EmpiricalMeasure(b)) -
                   wasserstein1_sorted_1d(EmpiricalMeasure(a), EmpiricalMeasure(b))) < 1e-10);
  }
}

TEST_CASE("assignment W1 is a metric on random triples") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const Index q = 1 + trial % 3, n = 4 + trial % 13;
    const EmpiricalMeasure a(random_points(rng, q, n)), b(random_points(rng, q, n)), c(random_points(rng, q, n));
    const double ab = wasserstein1_assignment(a, b), ba = wasserstein1_assignment(b, a);
    const double bc = wasserstein1_assignment(b, c), ac = wasserstein1_assignment(a, c);
    CHECK(std::abs(ab - ba) < 1e-12);
    CHECK(ac <= ab + bc + 1e-12);
    CHECK(wasserstein1_assignment(a, a) < 1e-12);
    CHECK(ab > 0.0);
  }
}

TEST_CASE("replicated W1 equals assignment against the explicitly duplicated measure") {
  Rng rng(404);
  for (int trial = 0; trial < 12; ++trial) {
    const Index q = 1 + trial % 3, n = 2 + trial % 4, k = 1 + trial % 3;
    const Matrix small = random_points(rng, q, n), large = random_points(rng, q, k * n);
    Matrix dup(q, k * n);
    for (Index r = 0; r < k; ++r) dup.middleCols(r * n, n) = small;
    const double expect = k * n <= 8 ? oracle::w1_brute_force(dup, large)
                                     : wasserstein1_assignment(EmpiricalMeasure(dup), EmpiricalMeasure(large));
    CHECK(std::abs(wasserstein1_replicated(EmpiricalMeasure(small), EmpiricalMeasure(large)) - expect) < 1e-10);
  }
  CHECK_THROWS_AS(wasserstein1_replicated(EmpiricalMeasure(Matrix::Zero(1, 3)), EmpiricalMeasure(Matrix::Zero(1, 7))),
                  std::invalid_argument);
}

TEST_CASE("capacitated solver produces a feasible plan with the reported cost") {
  Rng rng(8);
  const std::size_t cols = 5, cap = 3, rows = cols * cap;
  std::vector<double> cost(rows * cols);
  for (auto& c : cost) c = rng.uniform();
  const auto plan = solve_capacitated_assignment(cost, rows, cols, cap);
  std::vector<std::size_t> load(cols, 0);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    ++load[plan.column_of_row[r]];
    total += cost[r * cols + plan.column_of_row[r]];
  }
  for (auto l : load) CHECK(l == cap);
  CHECK(total == doctest::Approx(plan.total_cost).epsilon(1e-14));
}

TEST_CASE("W1 to the uniform law") {
  CHECK(wasserstein1_to_uniform_1d(values({0.5})) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(wasserstein1_to_uniform_1d(values({0, 1})) == doctest::Approx(0.25).epsilon(1e-15));
  // A point outside [0,1] adds the mass-transport distance to the interval.
  CHECK(wasserstein1_to_uniform_1d(values({2})) == doctest::Approx(1.5).epsilon(1e-15));
  // Oracle: Simpson integration of |F_n - F| over [-1, 2].
  Rng rng(1);
  std::vector<double> pts(7);
  for (auto& p : pts) p = 1.4 * rng.uniform() - 0.2;
  auto Fn = [&](double t) {
    double c = 0;
    for (double p : pts) c += p <= t ? 1.0 : 0.0;
    return c / static_cast<double>(pts.size());
  };
  std::vector<double> splits = pts;
  splits.push_back(0.0);
  splits.push_back(1.0);
  splits.push_back(-1.0);
  splits.push_back(2.0);
  // F(t) = t crosses each level k/n of F_n: split there too so that the
  // integrand is linear on every piece and Simpson is exact
  for (std::size_t k = 0; k <= pts.size(); ++k) splits.push_back(static_cast<double>(k) / pts.size());
  std::sort(splits.begin(), splits.end());
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < splits.size(); ++k) {
    // F_n is constant on the open piece; evaluate it at the midpoint
    const double a = splits[k], b = splits[k + 1];
    if (b - a < 1e-15) continue;
    const double mid = 0.5 * (a + b);
    integral += oracle::simpson([&](double t) { return std::abs(Fn(mid) - std::clamp(t, 0.0, 1.0)); }, a, b, 2);
  }
  CHECK(std::abs(wasserstein1_to_uniform_1d(EmpiricalMeasure::from_values(pts)) - integral) < 1e-12);

  for (std::size_t n : {100, 1000, 10000}) {
    const auto m = sample_iid(UniformCube{1}, n, derive_seed(5, n, 0));
    CHECK(wasserstein1_to_uniform_1d(m) <= 2.0 / std::sqrt(static_cast<double>(n)));
  }
}

TEST_CASE("rate function") {
  CHECK(rate_r_q(1, 100) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(rate_r_q(3, 1000) == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(rate_r_q(2, 99) == doctest::Approx(std::log(100.0) / std::sqrt(99.0)).epsilon(1e-15));
  CHECK(rate_r_q(2, 99) == doctest::Approx(0.46284).epsilon(1e-5));
  CHECK(rate_r_q(4, 16) == doctest::Approx(0.5));
  // log(1+n)/sqrt(n) rises until 2n/(1+n) = log(1+n), i.e. up to n = 4.
  CHECK(rate_r_q(2, 3) > rate_r_q(2, 2));
  CHECK(rate_r_q(2, 4) > rate_r_q(2, 3));
  for (int q = 1; q <= 4; ++q) {
    const std::size_t start = q == 2 ? 4 : 2;
    double prev = rate_r_q(q, start);
    bool decreasing = true;
    for (std::size_t n = start + 1; n <= 1000000; n += n / 50 + 1) {
      const double r = rate_r_q(q, n);
      decreasing = decreasing && r < prev;
      prev = r;
    }
    CHECK(decreasing);
  }
  CHECK_THROWS_AS(rate_r_q(0, 10), std::invalid_argument);
  CHECK_THROWS_AS(rate_r_q(1, 0), std::invalid_argument);
}

TEST_CASE("seed derivation separates streams") {
  CHECK(derive_seed(1, 64, 0) == derive_seed(1, 64, 0));
  CHECK(derive_seed(1, 64, 0) != derive_seed(1, 64, 1));
  CHECK(derive_seed(1, 64, 0) != derive_seed(1, 128, 0));
  CHECK(derive_seed(1, 64, 0) != derive_seed(2, 64, 0));
  CHECK(derive_seed(0, 1, 0) != derive_seed(0, 0, 1));
}
