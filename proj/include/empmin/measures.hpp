#pragma once

#include "empmin/core.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace empmin::measures {

/// Uniform probability measure (1/n) sum_i delta_{z_i} on R^q. Points are the
/// columns of a q x n matrix. Immutable after construction.
class EmpiricalMeasure {
 public:
  /// Throws std::invalid_argument when the matrix has no rows or no columns.
  explicit EmpiricalMeasure(Matrix points, std::uint64_t seed = 0);

  static EmpiricalMeasure from_points(const std::vector<Vector>& points);
  /// One-dimensional measure from scalar values.
  static EmpiricalMeasure from_values(std::span<const double> values);

  Index size() const noexcept { return points_.cols(); }
  Index dim() const noexcept { return points_.rows(); }
  std::uint64_t seed() const noexcept { return seed_; }

  const Matrix& points() const noexcept { return points_; }
  auto point(Index i) const { return points_.col(i); }

 private:
  Matrix points_;
  std::uint64_t seed_;
};

struct StandardGaussian {
  Index q = 1;
  bool operator==(const StandardGaussian&) const = default;
};

/// Uniform law on [0, 1]^q.
struct UniformCube {
  Index q = 1;
  bool operator==(const UniformCube&) const = default;
};

/// Finitely supported law; atoms are the columns of `atoms`.
struct Discrete {
  Matrix atoms;
  std::vector<double> weights;
  bool operator==(const Discrete& o) const { return atoms == o.atoms && weights == o.weights; }
};

using DistributionSpec = std::variant<StandardGaussian, UniformCube, Discrete>;

/// Throws std::invalid_argument if the parameters are inconsistent (q < 1,
/// negative weights, weights not summing to 1 within 1e-12, ...).
void validate(const DistributionSpec& spec);
Index dimension(const DistributionSpec& spec);
/// Discrete law with equal weights on the points of `m`.
Discrete uniform_on(const EmpiricalMeasure& m);

/// n i.i.d. draws; deterministic in (spec, n, seed).
EmpiricalMeasure sample_iid(const DistributionSpec& spec, std::size_t n, std::uint64_t seed);

/// (1/n) sum |z_i|^r.
double moment(const EmpiricalMeasure& m, double r);

/// Exact W1 between two one-dimensional measures with equal n, via sorted
/// order statistics.
double wasserstein1_sorted_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b);

struct AssignmentOptions {
  std::size_t cap = 4096;
};

/// Raised when an assignment problem would exceed the configured size cap.
class CapExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Exact W1 between equal-size uniform empirical measures as a minimum-cost
/// perfect matching under the Euclidean ground cost.
double wasserstein1_assignment(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                               AssignmentOptions opts = {});

/// Exact W1 between uniform measures of sizes n and k*n (k >= 1 integer).
/// Each atom of the smaller measure carries k units of mass 1/(k n); solved as
/// a transportation problem with column capacity k. `opts.cap` bounds k*n.
double wasserstein1_replicated(const EmpiricalMeasure& small, const EmpiricalMeasure& large,
                               AssignmentOptions opts = {});

/// W1 between a one-dimensional measure and the uniform law on [0, 1]:
/// the exact integral of |F_n - F| over the real line.
double wasserstein1_to_uniform_1d(const EmpiricalMeasure& m);

/// n^{-1/2} (q=1), n^{-1/2} log(1+n) (q=2), n^{-1/q} (q>2).
double rate_r_q(int q, std::size_t n);

}  // namespace empmin::measures
