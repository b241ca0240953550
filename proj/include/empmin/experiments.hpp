#pragma once

#include "empmin/core.hpp"
#include "empmin/measures.hpp"
#include "empmin/objectives.hpp"
#include "empmin/optim.hpp"
#include "empmin/payoffs.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace empmin::experiments {

/// Importance-sampling objective for a basket option, Z ~ N(0, I_d).
struct IsProblem {
  payoffs::BasketOptionSpec option;
};

/// Ridge-regularized network regression; the law of Z is the uniform
/// measure on the dataset points (u_i, y_i).
struct NnProblem {
  objectives::MlpSpec mlp;
  measures::EmpiricalMeasure dataset;
};

/// v(x, z) = |x - z|^2 under an arbitrary law.
struct QuadraticProblem {
  measures::DistributionSpec law;
};

using Problem = std::variant<IsProblem, NnProblem, QuadraticProblem>;

objectives::FamilyPtr problem_family(const Problem& problem);
measures::DistributionSpec problem_law(const Problem& problem);
Index decision_dim(const Problem& problem);
Index noise_dim(const Problem& problem);

/// Default quadrature nodes for the importance-sampling reference. In one
/// dimension: 200 per piece of a rule split at the payoff kink. For q = 2, 3
/// the rule integrates along the basket gradient direction with a split rule
/// (100 nodes per piece) located per line, and over the q - 1 orthogonal axes
/// with 64 (q = 2) or 32 (q = 3) Gauss-Hermite nodes per axis.
int default_quadrature_nodes(Index q);

/// The population objective V(x) = E[v(x, Z)]: kink-adapted quadrature for
/// importance sampling, exact finite average over the dataset for networks, closed form
/// |x - m|^2 + tr Cov(Z) for the quadratic family.
class PopulationObjective {
 public:
  explicit PopulationObjective(const Problem& problem, int nodes_per_axis = 0);

  Index dim() const noexcept { return dim_; }
  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  /// quadrature or dataset objective; empty for the closed-form family
  const std::optional<objectives::WeightedObjective>& weighted() const noexcept { return weighted_; }
  std::size_t node_count() const noexcept;
  const Vector& quadratic_mean() const noexcept { return mean_; }
  double quadratic_trace() const noexcept { return trace_; }

 private:
  Index dim_ = 0;
  std::optional<objectives::WeightedObjective> weighted_;
  Vector mean_;
  double trace_ = 0.0;
};

enum class ReferenceMethod { quadrature_newton, closed_form, discrete_exact };

struct ReferenceSolution {
  Vector x_star;
  double v_star = 0.0;
  ReferenceMethod method = ReferenceMethod::closed_form;
  std::size_t quadrature_nodes = 0;
  /// |grad V(x_star)| under the reference integrator
  double grad_norm = 0.0;
};

std::string to_string(ReferenceMethod m);

struct ReferenceOptions {
  int nodes_per_axis = 0;  // 0 selects default_quadrature_nodes(q)
  /// used for the network problem (multistart gradient descent)
  optim::MinimizeOptions nn_optimizer = {.max_iters = 20000,
                                         .grad_tol = 1e-9,
                                         .method = optim::Method::gradient_descent,
                                         .armijo = {},
                                         .multistart = 8,
                                         .start_box_radius = 1.0,
                                         .seed = 0x5EED,
                                         .record_trace = false};
};

/// x* and V* = V(x*). Importance sampling is limited to q <= 3 (throws
/// std::invalid_argument otherwise).
ReferenceSolution reference_minimum(const Problem& problem, const ReferenceOptions& opts = {});

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares of log(err) on log(n). Needs >= 4 points with
/// err > 0 (std::invalid_argument otherwise). r_squared is 1 for a constant
/// series.
LogLogFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

struct RateStudyConfig {
  Problem problem;
  std::vector<std::size_t> n_grid;
  std::size_t replications = 20;
  std::uint64_t master_seed = 0;
  optim::MinimizeOptions optimizer;
  /// censoring above this fraction of R at any n invalidates the study
  double censor_limit = 0.05;
  /// start point; zeros when empty (the untranslated estimator for IS)
  std::optional<Vector> x0;
  std::size_t jobs = 1;
  std::optional<ReferenceSolution> reference;
  ReferenceOptions reference_options;
};

struct ReplicationRecord {
  std::size_t n = 0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  double value = 0.0;     // V_n(X_n*)
  double value_err = 0.0; // |V_n(X_n*) - V*|
  double x_err_sq = 0.0;  // |X_n* - x*|^2
  double max_abs_x = 0.0; // |X_n*|
  std::size_t iters = 0;
  bool converged = false;
};

struct RatePoint {
  std::size_t n = 0;
  std::size_t used = 0;
  std::size_t censored = 0;
  double mean_value_err = 0.0;
  double se_value_err = 0.0;
  double mean_x_err_sq = 0.0;
  double se_x_err_sq = 0.0;
  /// mean and standard error of the signed gap V* - V_n(X_n*)
  double mean_gap = 0.0;
  double se_gap = 0.0;
  double value_ratio = 0.0;  // mean_value_err / R_q(n)
  double x_ratio = 0.0;      // mean_x_err_sq / R_q(n)
  double max_abs_x = 0.0;
};

struct RateStudyResult {
  int q = 1;
  ReferenceSolution reference;
  std::vector<RatePoint> points;
  std::vector<ReplicationRecord> records;  // ordered by (n, replication)
  LogLogFit value_fit;
  LogLogFit x_fit;
  bool valid = true;
  std::string invalid_reason;
  double max_abs_x = 0.0;
};

void validate(const RateStudyConfig& config);

/// For each n and replication r: draw n samples with derive_seed(master, n, r),
/// minimize V_n, and record the errors against the reference. Censored
/// (non-converged) replications are kept in `records` but excluded from the
/// means. Deterministic in the config, independent of `jobs`.
RateStudyResult run_rate_study(const RateStudyConfig& config);

struct Lemma1Report {
  double lhs = 0.0;  // |V_n(X_n*) - V*|
  double rhs = 0.0;  // max over the grid of |V_n(x) - V(x)|
  bool holds = false;
  Vector x_n_star;
  std::size_t grid_size = 0;
};

/// Checks |V_n(X_n*) - V*| <= sup_Theta |V_n - V| (+1e-10) on a finite Theta
/// made of `theta_grid`, x* and the computed X_n*.
Lemma1Report lemma1_check(const Problem& problem, std::size_t n, std::uint64_t seed,
                          std::vector<Vector> theta_grid, const optim::MinimizeOptions& opts = {},
                          const std::optional<ReferenceSolution>& reference = std::nullopt);

struct W1StudyConfig {
  int q = 1;
  std::vector<std::size_t> n_grid;
  std::size_t replications = 50;
  std::uint64_t master_seed = 0;
  /// size multiplier of the fresh reference sample used for q >= 2
  std::size_t reference_factor = 4;
  std::size_t cap = 8192;
  std::size_t jobs = 1;
};

struct W1Record {
  std::size_t n = 0;
  std::size_t replication = 0;
  double w1 = 0.0;
};

struct W1Point {
  std::size_t n = 0;
  double mean = 0.0;
  double se = 0.0;
};

struct W1StudyResult {
  int q = 1;
  std::vector<W1Point> points;
  std::vector<W1Record> records;
  LogLogFit fit;
};

void validate(const W1StudyConfig& config);

/// Mean W1 between the empirical measure of n uniform points on [0,1]^q and
/// the uniform law. q = 1 is exact; q >= 2 uses an independent sample of
/// reference_factor * n points as the reference measure.
W1StudyResult w1_rate_study(const W1StudyConfig& config);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast self-checks of the library invariants (gradients, transport,
/// quadrature, pricing, deviation bound). Deterministic in `seed`.
std::vector<CheckResult> run_invariant_suite(std::uint64_t seed);

}  // namespace empmin::experiments
