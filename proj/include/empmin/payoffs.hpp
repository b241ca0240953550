#pragma once

#include "empmin/core.hpp"

#include <cstdint>
#include <vector>

namespace empmin::payoffs {

enum class Flavor { call, put };

/// Black-Scholes basket option. The asset i terminal value is
///   s0_i exp[(r - sum_j sigma_ij^2 / 2) T + sqrt(T) sum_j sigma_ij z_j].
/// The drift uses row-wise squared entries of sigma exactly as written above,
/// which coincides with the usual row-norm convention.
struct BasketOptionSpec {
  double r = 0.0;
  double T = 1.0;
  double K = 0.0;
  Matrix sigma;
  Vector s0;
  Vector a;
  Flavor flavor = Flavor::call;

  Index dim() const noexcept { return s0.size(); }
  bool operator==(const BasketOptionSpec& o) const {
    return r == o.r && T == o.T && K == o.K && sigma == o.sigma && s0 == o.s0 && a == o.a && flavor == o.flavor;
  }
};

/// Throws std::invalid_argument unless sigma is symmetric (1e-12) and
/// positive definite, T >= 0, K >= 0, and dimensions agree.
void validate(const BasketOptionSpec& spec);

/// One-asset convenience constructor (sigma is 1x1, a = 1).
BasketOptionSpec single_asset(double s0, double K, double r, double sigma, double T, Flavor flavor);

/// Weighted basket value sum_i a_i S_i(z).
double basket_value(const BasketOptionSpec& spec, const Eigen::Ref<const Vector>& z);

/// (basket - K)_+ for calls, (K - basket)_+ for puts.
double payoff_eval(const BasketOptionSpec& spec, const Eigen::Ref<const Vector>& z);

/// Closed-form E[phi(Z)], Z ~ N(0, 1), for d = 1, a = 1 (no discount factor):
///   call: s0 e^{rT} N(d1) - K N(d2),  put: K N(-d2) - s0 e^{rT} N(-d1),
///   d1 = (ln(s0/K) + (r + sigma^2/2) T) / (sigma sqrt T),  d2 = d1 - sigma sqrt T.
double bs_price_1d(const BasketOptionSpec& spec);

/// For d = 1 with K > 0: the z at which the basket equals the strike, i.e.
/// the kink of the payoff. Empty when no kink exists.
std::vector<double> kink_points_1d(const BasketOptionSpec& spec);

struct GrowthProbeReport {
  double A = 0.0;
  double B = 0.0;
  /// max over held-out probes of max(0, |phi(z)| - A e^{B|z|}); 0 means the
  /// fitted growth bound held everywhere it was checked.
  double max_violation = 0.0;
  /// same for finite-difference Lipschitz ratios on B(0, r) vs A e^{B r}
  double max_lipschitz_violation = 0.0;
  std::vector<double> radii;
  /// per radius: max |phi| on the sphere and the running max Lipschitz ratio
  std::vector<double> sphere_max;
  std::vector<double> lipschitz;
};

/// Probe |phi(z)| <= A e^{B|z|} and [phi|B(0,r)]_Lip <= A e^{B r} numerically.
/// B is the least-squares slope of the log of per-radius envelopes (values
/// above 1e-12 only), clipped at 0; A is the smallest constant making the bound
/// hold on every probed point. A fresh probe set at the same radii and at
/// radius midpoints measures violations of the fitted bound.
GrowthProbeReport growth_probe(const BasketOptionSpec& spec, const std::vector<double>& radii,
                               std::size_t samples_per_radius, std::uint64_t seed);

}  // namespace empmin::payoffs
