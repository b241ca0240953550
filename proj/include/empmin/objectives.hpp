#pragma once

#include "empmin/core.hpp"
#include "empmin/measures.hpp"
#include "empmin/payoffs.hpp"

#include <memory>
#include <string>
#include <vector>

namespace empmin::objectives {

using ConstRef = Eigen::Ref<const Vector>;

/// Where weighted derivatives are accumulated; null members are skipped.
struct Derivatives {
  Vector* gradient = nullptr;
  Matrix* hessian = nullptr;
};

/// A nonnegative integrand v(x, z) with x in R^d and z in R^q.
///
/// Families may split off an x-independent per-sample factor (for instance
/// phi(z)^2 in the importance-sampling family); EmpiricalObjective computes it
/// once per sample via sample_factor() and hands it back to evaluate().
class ObjectiveFamily {
 public:
  virtual ~ObjectiveFamily() = default;

  virtual std::string name() const = 0;
  virtual Index decision_dim() const = 0;
  virtual Index noise_dim() const = 0;
  virtual bool has_hessian() const { return false; }

  virtual double sample_factor(const ConstRef& z) const;

  /// Returns v(x, z) and adds weight * grad_x v (resp. weight * hess_x v)
  /// into the requested outputs.
  virtual double evaluate(const Vector& x, const ConstRef& z, double factor, double weight,
                          Derivatives out) const = 0;

  double eval(const Vector& x, const ConstRef& z) const;
  Vector grad(const Vector& x, const ConstRef& z) const;
  Matrix hessian(const Vector& x, const ConstRef& z) const;
};

using FamilyPtr = std::shared_ptr<const ObjectiveFamily>;

/// v(x, z) = phi(z)^2 exp(-<x, z> + |x|^2 / 2) with phi a basket payoff.
/// Strictly convex in x whenever phi(z) > 0. Exponents with |e| > 700 throw
/// ExponentOverflow.
class ImportanceSamplingFamily final : public ObjectiveFamily {
 public:
  explicit ImportanceSamplingFamily(payoffs::BasketOptionSpec spec);

  std::string name() const override { return "importance-sampling"; }
  Index decision_dim() const override { return spec_.dim(); }
  Index noise_dim() const override { return spec_.dim(); }
  bool has_hessian() const override { return true; }
  double sample_factor(const ConstRef& z) const override;
  double evaluate(const Vector& x, const ConstRef& z, double factor, double weight,
                  Derivatives out) const override;

  const payoffs::BasketOptionSpec& option() const noexcept { return spec_; }

 private:
  payoffs::BasketOptionSpec spec_;
};

/// v(x, z) = |x - z|^2; minimizer of the sample average is the sample mean.
class QuadraticFamily final : public ObjectiveFamily {
 public:
  explicit QuadraticFamily(Index dim);

  std::string name() const override { return "quadratic"; }
  Index decision_dim() const override { return dim_; }
  Index noise_dim() const override { return dim_; }
  bool has_hessian() const override { return true; }
  double evaluate(const Vector& x, const ConstRef& z, double factor, double weight,
                  Derivatives out) const override;

 private:
  Index dim_;
};

/// Fully connected sigmoid network without bias terms:
///   psi(x, u) = x_K . s(x_{K-1} . ... s(x_1 . u))
/// with s(t) = 1 / (1 + e^{-t}) applied componentwise. Layer k is a
/// d_k x d_{k-1} matrix. The flat weight vector stores the layers in order,
/// each row-major.
struct MlpSpec {
  std::vector<Index> layers;  // d_0, ..., d_K
  double lambda = 1.0;        // ridge weight

  Index depth() const noexcept { return static_cast<Index>(layers.size()) - 1; }
  Index input_dim() const { return layers.front(); }
  Index output_dim() const { return layers.back(); }
  /// d_0 d_1 + ... + d_{K-1} d_K
  Index weight_count() const;
  bool operator==(const MlpSpec&) const = default;
};

void validate(const MlpSpec& spec);

Vector mlp_forward(const MlpSpec& spec, const Vector& x, const ConstRef& u);

/// v(x, (u, y)) = |psi(x, u) - y|^2 / 2 + lambda |x|^2 / 2 with z = (u, y)
/// concatenated; gradient by reverse-mode differentiation.
class MlpFamily final : public ObjectiveFamily {
 public:
  explicit MlpFamily(MlpSpec spec);

  std::string name() const override { return "mlp-regression"; }
  Index decision_dim() const override { return spec_.weight_count(); }
  Index noise_dim() const override { return spec_.input_dim() + spec_.output_dim(); }
  double evaluate(const Vector& x, const ConstRef& z, double factor, double weight,
                  Derivatives out) const override;

  const MlpSpec& spec() const noexcept { return spec_; }

 private:
  MlpSpec spec_;
};

FamilyPtr make_is_family(const payoffs::BasketOptionSpec& spec);
FamilyPtr make_quadratic_family(Index dim);
/// Checks that `dataset` points have dimension d_0 + d_K.
FamilyPtr make_nn_family(const MlpSpec& spec, const measures::EmpiricalMeasure& dataset);

/// Weighted sample average sum_i w_i v(x, z_i). Holds the per-sample factor
/// cache, built eagerly; immutable afterwards.
class WeightedObjective {
 public:
  WeightedObjective(FamilyPtr family, Matrix nodes, std::vector<double> weights);

  const ObjectiveFamily& family() const noexcept { return *family_; }
  const FamilyPtr& family_ptr() const noexcept { return family_; }
  Index dim() const noexcept { return family_->decision_dim(); }
  Index sample_count() const noexcept { return nodes_.cols(); }
  const Matrix& nodes() const noexcept { return nodes_; }
  const std::vector<double>& factors() const noexcept { return factors_; }

  double value(const Vector& x) const;
  double value_and_gradient(const Vector& x, Vector& grad) const;
  Vector gradient(const Vector& x) const;
  /// Throws std::logic_error when the family has no analytic Hessian.
  Matrix hessian(const Vector& x) const;

 private:
  double accumulate(const Vector& x, Derivatives out) const;

  FamilyPtr family_;
  Matrix nodes_;
  std::vector<double> weights_;
  std::vector<double> factors_;
};

/// V_n(x) = (1/n) sum_i v(x, Z_i).
class EmpiricalObjective : public WeightedObjective {
 public:
  EmpiricalObjective(FamilyPtr family, measures::EmpiricalMeasure samples);
  const measures::EmpiricalMeasure& samples() const noexcept { return samples_; }

 private:
  measures::EmpiricalMeasure samples_;
};

double eval_empirical(const EmpiricalObjective& obj, const Vector& x);
Vector grad_empirical(const EmpiricalObjective& obj, const Vector& x);

/// Summary of the translated estimator terms
///   Y_i = phi(Z_i + x) exp(-|x|^2 / 2 - <x, Z_i>).
struct EstimatorStats {
  double mean = 0.0;
  double variance = 0.0;   // (1/n) sum (Y_i - mean)^2
  double std_error = 0.0;  // sqrt(sample variance / n), 0 when n = 1
  Index n = 0;
};

EstimatorStats translated_stats(const payoffs::BasketOptionSpec& spec, const Vector& x,
                                const measures::EmpiricalMeasure& samples);
/// (1/n) sum_i Y_i, unbiased for E[phi(Z)] for every translation x.
double translated_estimator(const payoffs::BasketOptionSpec& spec, const Vector& x,
                            const measures::EmpiricalMeasure& samples);
/// Empirical variance (1/n) sum (Y_i - mean)^2 of the translated terms.
double estimator_variance(const payoffs::BasketOptionSpec& spec, const Vector& x,
                          const measures::EmpiricalMeasure& samples);

}  // namespace empmin::objectives
