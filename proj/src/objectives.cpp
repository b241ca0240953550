#include "empmin/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace empmin::objectives {

double ObjectiveFamily::sample_factor(const ConstRef&) const { return 1.0; }

double ObjectiveFamily::eval(const Vector& x, const ConstRef& z) const {
  return evaluate(x, z, sample_factor(z), 1.0, {});
}

Vector ObjectiveFamily::grad(const Vector& x, const ConstRef& z) const {
  Vector g = Vector::Zero(decision_dim());
  evaluate(x, z, sample_factor(z), 1.0, {&g, nullptr});
  return g;
}

Matrix ObjectiveFamily::hessian(const Vector& x, const ConstRef& z) const {
  if (!has_hessian()) throw std::logic_error(name() + ": no analytic Hessian");
  Matrix h = Matrix::Zero(decision_dim(), decision_dim());
  evaluate(x, z, sample_factor(z), 1.0, {nullptr, &h});
  return h;
}

// --- importance sampling -------------------------------------------------

ImportanceSamplingFamily::ImportanceSamplingFamily(payoffs::BasketOptionSpec spec) : spec_(std::move(spec)) {
  payoffs::validate(spec_);
}

double ImportanceSamplingFamily::sample_factor(const ConstRef& z) const {
  const double phi = payoffs::payoff_eval(spec_, z);
  return phi * phi;
}

double ImportanceSamplingFamily::evaluate(const Vector& x, const ConstRef& z, double factor, double weight,
                                          Derivatives out) const {
  if (factor == 0.0) return 0.0;
  const double e = -x.dot(z) + 0.5 * x.squaredNorm();
  const double v = factor * guarded_exp(e);
  if (out.gradient || out.hessian) {
    const Vector diff = x - z;
    if (out.gradient) *out.gradient += (weight * v) * diff;
    if (out.hessian) {
      out.hessian->noalias() += (weight * v) * diff * diff.transpose();
      out.hessian->diagonal().array() += weight * v;
    }
  }
  return v;
}

// --- quadratic -------------------------------------------------------------

QuadraticFamily::QuadraticFamily(Index dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("quadratic family: dimension must be >= 1");
}

double QuadraticFamily::evaluate(const Vector& x, const ConstRef& z, double, double weight, Derivatives out) const {
  const Vector diff = x - z;
  if (out.gradient) *out.gradient += (2.0 * weight) * diff;
  if (out.hessian) out.hessian->diagonal().array() += 2.0 * weight;
  return diff.squaredNorm();
}

FamilyPtr make_is_family(const payoffs::BasketOptionSpec& spec) {
  return std::make_shared<ImportanceSamplingFamily>(spec);
}

FamilyPtr make_quadratic_family(Index dim) { return std::make_shared<QuadraticFamily>(dim); }

FamilyPtr make_nn_family(const MlpSpec& spec, const measures::EmpiricalMeasure& dataset) {
  auto fam = std::make_shared<MlpFamily>(spec);
  if (dataset.dim() != fam->noise_dim())
    throw std::invalid_argument("nn family: dataset points must have dimension d_0 + d_K = " +
                                std::to_string(fam->noise_dim()));
  return fam;
}

// --- sample averages -------------------------------------------------------

WeightedObjective::WeightedObjective(FamilyPtr family, Matrix nodes, std::vector<double> weights)
    : family_(std::move(family)), nodes_(std::move(nodes)), weights_(std::move(weights)) {
  if (!family_) throw std::invalid_argument("objective: null family");
  if (nodes_.rows() != family_->noise_dim())
    throw std::invalid_argument("objective: sample dimension " + std::to_string(nodes_.rows()) +
                                " does not match family noise dimension " + std::to_string(family_->noise_dim()));
  if (static_cast<Index>(weights_.size()) != nodes_.cols())
    throw std::invalid_argument("objective: one weight per sample required");
  factors_.resize(weights_.size());
  for (Index i = 0; i < nodes_.cols(); ++i) factors_[static_cast<std::size_t>(i)] = family_->sample_factor(nodes_.col(i));
}

double WeightedObjective::accumulate(const Vector& x, Derivatives out) const {
  if (x.size() != dim()) throw std::invalid_argument("objective: x has wrong dimension");
  double total = 0.0;
  for (Index i = 0; i < nodes_.cols(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    total += weights_[k] * family_->evaluate(x, nodes_.col(i), factors_[k], weights_[k], out);
  }
  return total;
}

double WeightedObjective::value(const Vector& x) const { return accumulate(x, {}); }

double WeightedObjective::value_and_gradient(const Vector& x, Vector& grad) const {
  grad = Vector::Zero(dim());
  return accumulate(x, {&grad, nullptr});
}

Vector WeightedObjective::gradient(const Vector& x) const {
  Vector g;
  value_and_gradient(x, g);
  return g;
}

Matrix WeightedObjective::hessian(const Vector& x) const {
  if (!family_->has_hessian()) throw std::logic_error(family_->name() + ": no analytic Hessian");
  Matrix h = Matrix::Zero(dim(), dim());
  accumulate(x, {nullptr, &h});
  return h;
}

namespace {
std::vector<double> uniform_weights(Index n) {
  return std::vector<double>(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
}
}  // namespace

EmpiricalObjective::EmpiricalObjective(FamilyPtr family, measures::EmpiricalMeasure samples)
    : WeightedObjective(std::move(family), samples.points(), uniform_weights(samples.size())),
      samples_(std::move(samples)) {}

double eval_empirical(const EmpiricalObjective& obj, const Vector& x) { return obj.value(x); }

Vector grad_empirical(const EmpiricalObjective& obj, const Vector& x) { return obj.gradient(x); }

// --- translated estimator --------------------------------------------------

EstimatorStats translated_stats(const payoffs::BasketOptionSpec& spec, const Vector& x,
                                const measures::EmpiricalMeasure& samples) {
  if (samples.dim() != spec.dim() || x.size() != spec.dim())
    throw std::invalid_argument("translated estimator: dimension mismatch");
  const Index n = samples.size();
  const double half_sq = 0.5 * x.squaredNorm();
  std::vector<double> terms(static_cast<std::size_t>(n));
  double mean = 0.0;
  for (Index i = 0; i < n; ++i) {
    const auto z = samples.point(i);
    const double phi = payoffs::payoff_eval(spec, z + x);
    const double y = phi == 0.0 ? 0.0 : phi * guarded_exp(-half_sq - x.dot(z));
    terms[static_cast<std::size_t>(i)] = y;
    mean += y;
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double y : terms) ss += (y - mean) * (y - mean);
  EstimatorStats st;
  st.n = n;
  st.mean = mean;
  st.variance = ss / static_cast<double>(n);
  st.std_error = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
  return st;
}

double translated_estimator(const payoffs::BasketOptionSpec& spec, const Vector& x,
                            const measures::EmpiricalMeasure& samples) {
  return translated_stats(spec, x, samples).mean;
}

double estimator_variance(const payoffs::BasketOptionSpec& spec, const Vector& x,
                          const measures::EmpiricalMeasure& samples) {
  return translated_stats(spec, x, samples).variance;
}

}  // namespace empmin::objectives
