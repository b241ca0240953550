#include "empmin/measures.hpp"

#include "empmin/assignment.hpp"
#include "empmin/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace empmin::measures {

EmpiricalMeasure::EmpiricalMeasure(Matrix points, std::uint64_t seed)
    : points_(std::move(points)), seed_(seed) {
  if (points_.rows() < 1) throw std::invalid_argument("empirical measure needs dimension q >= 1");
  if (points_.cols() < 1) throw std::invalid_argument("empirical measure needs n >= 1 points");
}

EmpiricalMeasure EmpiricalMeasure::from_points(const std::vector<Vector>& points) {
  if (points.empty()) throw std::invalid_argument("empirical measure needs n >= 1 points");
  const Index q = points.front().size();
  Matrix m(q, static_cast<Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != q) throw std::invalid_argument("points have inconsistent dimensions");
    m.col(static_cast<Index>(i)) = points[i];
  }
  return EmpiricalMeasure(std::move(m));
}

EmpiricalMeasure EmpiricalMeasure::from_values(std::span<const double> values) {
  Matrix m(1, static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m(0, static_cast<Index>(i)) = values[i];
  return EmpiricalMeasure(std::move(m));
}

void validate(const DistributionSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Discrete>) {
          if (s.atoms.rows() < 1 || s.atoms.cols() < 1) throw std::invalid_argument("discrete law needs atoms");
          if (static_cast<Index>(s.weights.size()) != s.atoms.cols())
            throw std::invalid_argument("discrete law: one weight per atom required");
          double total = 0.0;
          for (double w : s.weights) {
            if (!(w >= 0.0)) throw std::invalid_argument("discrete law: weights must be nonnegative");
            total += w;
          }
          if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("discrete law: weights must sum to 1");
        } else {
          if (s.q < 1) throw std::invalid_argument("distribution dimension must be >= 1");
        }
      },
      spec);
}

Index dimension(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& s) -> Index {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Discrete>)
          return s.atoms.rows();
        else
          return s.q;
      },
      spec);
}

Discrete uniform_on(const EmpiricalMeasure& m) {
  return Discrete{m.points(), std::vector<double>(static_cast<std::size_t>(m.size()), 1.0 / static_cast<double>(m.size()))};
}

EmpiricalMeasure sample_iid(const DistributionSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_iid: n must be >= 1");
  validate(spec);
  const Index q = dimension(spec);
  Matrix pts(q, static_cast<Index>(n));
  Rng rng(seed);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, StandardGaussian>) {
          for (Index i = 0; i < pts.cols(); ++i)
            for (Index k = 0; k < q; ++k) pts(k, i) = rng.normal();
        } else if constexpr (std::is_same_v<T, UniformCube>) {
          for (Index i = 0; i < pts.cols(); ++i)
            for (Index k = 0; k < q; ++k) pts(k, i) = rng.uniform();
        } else {
          std::vector<double> cdf(s.weights.size());
          std::partial_sum(s.weights.begin(), s.weights.end(), cdf.begin());
          for (Index i = 0; i < pts.cols(); ++i) {
            const double u = rng.uniform() * cdf.back();
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            auto idx = static_cast<Index>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
            pts.col(i) = s.atoms.col(idx);
          }
        }
      },
      spec);
  return EmpiricalMeasure(std::move(pts), seed);
}

double moment(const EmpiricalMeasure& m, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("moment: order r must be positive");
  double acc = 0.0;
  for (Index i = 0; i < m.size(); ++i) acc += std::pow(m.point(i).norm(), r);
  return acc / static_cast<double>(m.size());
}

namespace {

std::vector<double> sorted_values(const EmpiricalMeasure& m) {
  std::vector<double> v(m.points().data(), m.points().data() + m.size());
  std::stable_sort(v.begin(), v.end());
  return v;
}

void require_same_shape(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("W1: dimension mismatch");
  if (a.size() != b.size()) throw std::invalid_argument("W1: unequal sample counts");
}

std::vector<double> distance_matrix(const EmpiricalMeasure& rows, const EmpiricalMeasure& cols) {
  const auto nr = static_cast<std::size_t>(rows.size());
  const auto nc = static_cast<std::size_t>(cols.size());
  std::vector<double> c(nr * nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j)
      c[i * nc + j] = (rows.point(static_cast<Index>(i)) - cols.point(static_cast<Index>(j))).norm();
  return c;
}

}  // namespace

double wasserstein1_sorted_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.dim() != 1 || b.dim() != 1) throw std::invalid_argument("wasserstein1_sorted_1d: q must be 1");
  require_same_shape(a, b);
  const auto sa = sorted_values(a);
  const auto sb = sorted_values(b);
  double acc = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) acc += std::abs(sa[i] - sb[i]);
  return acc / static_cast<double>(sa.size());
}

double wasserstein1_assignment(const EmpiricalMeasure& a, const EmpiricalMeasure& b, AssignmentOptions opts) {
  require_same_shape(a, b);
  const auto n = static_cast<std::size_t>(a.size());
  if (n > opts.cap) throw CapExceeded("wasserstein1_assignment: n = " + std::to_string(n) + " exceeds cap " + std::to_string(opts.cap));
  const auto cost = distance_matrix(a, b);
  return solve_capacitated_assignment(cost, n, n, 1).total_cost / static_cast<double>(n);
}

double wasserstein1_replicated(const EmpiricalMeasure& small, const EmpiricalMeasure& large, AssignmentOptions opts) {
  if (small.dim() != large.dim()) throw std::invalid_argument("W1: dimension mismatch");
  const auto n = static_cast<std::size_t>(small.size());
  const auto m = static_cast<std::size_t>(large.size());
  if (m % n != 0) throw std::invalid_argument("wasserstein1_replicated: larger size must be a multiple of the smaller");
  if (m > opts.cap) throw CapExceeded("wasserstein1_replicated: size " + std::to_string(m) + " exceeds cap " + std::to_string(opts.cap));
  const auto cost = distance_matrix(large, small);
  return solve_capacitated_assignment(cost, m, n, m / n).total_cost / static_cast<double>(m);
}

double wasserstein1_to_uniform_1d(const EmpiricalMeasure& m) {
  if (m.dim() != 1) throw std::invalid_argument("wasserstein1_to_uniform_1d: q must be 1");
  const auto pts = sorted_values(m);
  for (double p : pts)
    if (!std::isfinite(p)) throw std::invalid_argument("wasserstein1_to_uniform_1d: non-finite point");
  const auto n = static_cast<double>(pts.size());

  // Breakpoints: sample points plus the support ends of the uniform law.
  std::vector<double> knots = pts;
  knots.push_back(0.0);
  knots.push_back(1.0);
  std::sort(knots.begin(), knots.end());

  // Integral of |c - F(x)| over [l, u] with F(x) = clamp(x, 0, 1), where [l, u]
  // lies inside one of (-inf, 0], [0, 1], [1, inf).
  auto piece = [](double c, double l, double u) {
    if (u <= 0.0) return std::abs(c) * (u - l);
    if (l >= 1.0) return std::abs(c - 1.0) * (u - l);
    if (c <= l) return 0.5 * ((u - c) * (u - c) - (l - c) * (l - c));
    if (c >= u) return 0.5 * ((c - l) * (c - l) - (c - u) * (c - u));
    return 0.5 * ((c - l) * (c - l) + (u - c) * (u - c));
  };

  double total = 0.0;
  std::size_t below = 0;  // number of sample points <= current left knot
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double l = knots[k];
    const double u = knots[k + 1];
    while (below < pts.size() && pts[below] <= l) ++below;
    if (u > l) total += piece(static_cast<double>(below) / n, l, u);
  }
  return total;
}

double rate_r_q(int q, std::size_t n) {
  if (q < 1) throw std::invalid_argument("rate_r_q: q must be >= 1");
  if (n < 1) throw std::invalid_argument("rate_r_q: n must be >= 1");
  const auto nn = static_cast<double>(n);
  if (q == 1) return 1.0 / std::sqrt(nn);
  if (q == 2) return std::log1p(nn) / std::sqrt(nn);
  return std::pow(nn, -1.0 / static_cast<double>(q));
}

}  // namespace empmin::measures
