#include "empmin/payoffs.hpp"

#include "empmin/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace empmin::payoffs {

void validate(const BasketOptionSpec& spec) {
  const Index d = spec.s0.size();
  if (d < 1) throw std::invalid_argument("basket option: dimension must be >= 1");
  if (spec.a.size() != d || spec.sigma.rows() != d || spec.sigma.cols() != d)
    throw std::invalid_argument("basket option: sigma, s0 and a dimensions disagree");
  if (!(spec.T >= 0.0)) throw std::invalid_argument("basket option: T must be >= 0");
  if (!(spec.K >= 0.0)) throw std::invalid_argument("basket option: K must be >= 0");
  if (!std::isfinite(spec.r)) throw std::invalid_argument("basket option: r must be finite");
  if ((spec.sigma - spec.sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("basket option: sigma must be symmetric");
  Eigen::LLT<Matrix> llt(spec.sigma);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("basket option: sigma must be positive definite");
}

BasketOptionSpec single_asset(double s0, double K, double r, double sigma, double T, Flavor flavor) {
  BasketOptionSpec spec;
  spec.r = r;
  spec.T = T;
  spec.K = K;
  spec.sigma = Matrix::Constant(1, 1, sigma);
  spec.s0 = Vector::Constant(1, s0);
  spec.a = Vector::Constant(1, 1.0);
  spec.flavor = flavor;
  return spec;
}

double basket_value(const BasketOptionSpec& spec, const Eigen::Ref<const Vector>& z) {
  const Index d = spec.dim();
  if (z.size() != d) throw std::invalid_argument("payoff: z dimension does not match the option");
  const double sqrt_t = std::sqrt(spec.T);
  double basket = 0.0;
  for (Index i = 0; i < d; ++i) {
    const auto row = spec.sigma.row(i);
    const double drift = (spec.r - 0.5 * row.squaredNorm()) * spec.T;
    basket += spec.a[i] * spec.s0[i] * std::exp(drift + sqrt_t * row.dot(z));
  }
  return basket;
}

double payoff_eval(const BasketOptionSpec& spec, const Eigen::Ref<const Vector>& z) {
  const double basket = basket_value(spec, z);
  return spec.flavor == Flavor::call ? std::max(basket - spec.K, 0.0) : std::max(spec.K - basket, 0.0);
}

namespace {
double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }
}  // namespace

double bs_price_1d(const BasketOptionSpec& spec) {
  if (spec.dim() != 1) throw std::invalid_argument("bs_price_1d: only d = 1 is supported");
  if (spec.a[0] != 1.0) throw std::invalid_argument("bs_price_1d: basket weight must be 1");
  const double sigma = spec.sigma(0, 0);
  if (!(spec.T > 0.0 && spec.K > 0.0 && sigma > 0.0))
    throw std::invalid_argument("bs_price_1d: requires T > 0, K > 0, sigma > 0");
  const double vol = sigma * std::sqrt(spec.T);
  const double forward = spec.s0[0] * std::exp(spec.r * spec.T);
  const double d1 = (std::log(spec.s0[0] / spec.K) + (spec.r + 0.5 * sigma * sigma) * spec.T) / vol;
  const double d2 = d1 - vol;
  if (spec.flavor == Flavor::call) return forward * norm_cdf(d1) - spec.K * norm_cdf(d2);
  return spec.K * norm_cdf(-d2) - forward * norm_cdf(-d1);
}

std::vector<double> kink_points_1d(const BasketOptionSpec& spec) {
  if (spec.dim() != 1) throw std::invalid_argument("kink_points_1d: only d = 1 is supported");
  const double scale = spec.a[0] * spec.s0[0];
  const double slope = spec.sigma(0, 0) * std::sqrt(spec.T);
  if (!(spec.K > 0.0) || !(scale > 0.0) || slope == 0.0) return {};
  const double drift = (spec.r - 0.5 * spec.sigma(0, 0) * spec.sigma(0, 0)) * spec.T;
  return {(std::log(spec.K / scale) - drift) / slope};
}

namespace {

Vector random_direction(Rng& rng, Index d) {
  Vector u(d);
  do {
    for (Index k = 0; k < d; ++k) u[k] = rng.normal();
  } while (u.norm() == 0.0);
  return u / u.norm();
}

struct Probe {
  double radius;
  double value;
  double lipschitz;
};

std::vector<Probe> probe_sphere(const BasketOptionSpec& spec, double radius, std::size_t count, Rng& rng) {
  const Index d = spec.dim();
  std::vector<Probe> out;
  out.reserve(count);
  const double h = 1e-6 * std::max(1.0, radius);
  for (std::size_t s = 0; s < count; ++s) {
    // In one dimension the sphere is {-r, r}; alternate deterministically.
    Vector dir = d == 1 ? Vector::Constant(1, s % 2 == 0 ? 1.0 : -1.0) : random_direction(rng, d);
    const Vector z = radius * dir;
    const double value = payoff_eval(spec, z);
    const Vector e = d == 1 ? dir : random_direction(rng, d);
    // central difference along e, kept inside B(0, radius + h)
    const double fd = std::abs(payoff_eval(spec, z + h * e) - payoff_eval(spec, z - h * e)) / (2.0 * h);
    out.push_back({radius, std::abs(value), fd});
  }
  return out;
}

}  // namespace

GrowthProbeReport growth_probe(const BasketOptionSpec& spec, const std::vector<double>& radii,
                               std::size_t samples_per_radius, std::uint64_t seed) {
  validate(spec);
  if (radii.empty()) throw std::invalid_argument("growth_probe: radii must be nonempty");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0)) throw std::invalid_argument("growth_probe: radii must be positive");
    if (k > 0 && !(radii[k] > radii[k - 1])) throw std::invalid_argument("growth_probe: radii must be increasing");
  }
  if (samples_per_radius < 1) throw std::invalid_argument("growth_probe: need at least one sample per radius");

  constexpr double kFloor = 1e-12;
  GrowthProbeReport rep;
  rep.radii = radii;
  Rng rng(seed);
  std::vector<Probe> fit_set;
  double lip_running = 0.0;
  for (double r : radii) {
    const auto probes = probe_sphere(spec, r, samples_per_radius, rng);
    double vmax = 0.0;
    for (const auto& p : probes) {
      vmax = std::max(vmax, p.value);
      lip_running = std::max(lip_running, p.lipschitz);
    }
    rep.sphere_max.push_back(vmax);
    rep.lipschitz.push_back(lip_running);
    fit_set.insert(fit_set.end(), probes.begin(), probes.end());
  }

  // Least-squares slope of log(envelope) against radius.
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double env = std::max(rep.sphere_max[k], rep.lipschitz[k]);
    if (env > kFloor) {
      xs.push_back(radii[k]);
      ys.push_back(std::log(env));
    }
  }
  double slope = 0.0;
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      mx += xs[k];
      my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      sxy += (xs[k] - mx) * (ys[k] - my);
      sxx += (xs[k] - mx) * (xs[k] - mx);
    }
    if (sxx > 0.0) slope = sxy / sxx;
  }
  rep.B = std::max(slope, 0.0);

  double A = 0.0;
  for (const auto& p : fit_set) A = std::max(A, p.value * std::exp(-rep.B * p.radius));
  for (std::size_t k = 0; k < radii.size(); ++k) A = std::max(A, rep.lipschitz[k] * std::exp(-rep.B * radii[k]));
  rep.A = A;

  // Held-out probes: same radii plus midpoints, fresh directions.
  std::vector<double> holdout = radii;
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) holdout.push_back(0.5 * (radii[k] + radii[k + 1]));
  std::sort(holdout.begin(), holdout.end());
  Rng rng2(mix64(seed ^ 0xA5A5A5A5A5A5A5A5ULL));
  double lip_max = 0.0;
  std::size_t next_fit = 0;
  for (double r : holdout) {
    for (const auto& p : probe_sphere(spec, r, samples_per_radius, rng2)) {
      const double bound = rep.A * std::exp(rep.B * r);
      if (p.value > kFloor) rep.max_violation = std::max(rep.max_violation, p.value - bound);
      lip_max = std::max(lip_max, p.lipschitz);
    }
    while (next_fit < radii.size() && radii[next_fit] <= r) lip_max = std::max(lip_max, rep.lipschitz[next_fit++]);
    rep.max_lipschitz_violation = std::max(rep.max_lipschitz_violation, lip_max - rep.A * std::exp(rep.B * r));
  }
  rep.max_violation = std::max(rep.max_violation, 0.0);
  rep.max_lipschitz_violation = std::max(rep.max_lipschitz_violation, 0.0);
  return rep;
}

}  // namespace empmin::payoffs
