#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace empmin {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when exp() of an importance-sampling exponent would leave the
/// representable range (|e| > 700). Line searches catch it and shrink.
class ExponentOverflow : public std::overflow_error {
 public:
  explicit ExponentOverflow(double exponent)
      : std::overflow_error("exponent overflow: |" + std::to_string(exponent) + "| > 700"),
        exponent_(exponent) {}
  double exponent() const noexcept { return exponent_; }

 private:
  double exponent_;
};

inline constexpr double kMaxExponent = 700.0;

inline double guarded_exp(double e) {
  if (!(e <= kMaxExponent && e >= -kMaxExponent)) throw ExponentOverflow(e);
  return std::exp(e);
}

}  // namespace empmin
