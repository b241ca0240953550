#include "empmin/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace empmin::quadrature {

namespace {

struct PolyEval {
  double sum_sq;  // sum_{k<n} q_k(t)^2 over orthonormal q_k
  double value;   // monic-proportional p_n(t)
  double deriv;   // d/dt of `value`
};

PolyEval eval_recurrence(const std::vector<double>& alpha, const std::vector<double>& beta, double t) {
  const auto n = alpha.size();
  double q_prev = 0.0, q = 1.0 / std::sqrt(beta[0]);
  double d_prev = 0.0, d = 0.0;
  double sum_sq = q * q;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double sb = k == 0 ? 0.0 : std::sqrt(beta[k]);
    const double sb1 = std::sqrt(beta[k + 1]);
    const double q_next = ((t - alpha[k]) * q - sb * q_prev) / sb1;
    const double d_next = (q + (t - alpha[k]) * d - sb * d_prev) / sb1;
    q_prev = q;
    q = q_next;
    d_prev = d;
    d = d_next;
    sum_sq += q * q;
  }
  const double sb = n == 1 ? 0.0 : std::sqrt(beta[n - 1]);
  const double value = (t - alpha[n - 1]) * q - sb * q_prev;
  const double deriv = q + (t - alpha[n - 1]) * d - sb * d_prev;
  return {sum_sq, value, deriv};
}

template <class Build>
const Rule1d& cached(int kind, int n, Build build) {
  static std::recursive_mutex mutex;
  static std::map<std::pair<int, int>, Rule1d> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({kind, n});
  if (it == cache.end()) it = cache.emplace(std::pair{kind, n}, build()).first;
  return it->second;
}

void require_positive(int n) {
  if (n < 1) throw std::invalid_argument("quadrature: number of nodes must be >= 1");
}

}  // namespace

Rule1d gauss_from_recurrence(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const auto n = alpha.size();
  if (n == 0 || beta.size() < n) throw std::invalid_argument("gauss_from_recurrence: need n alphas and n betas");
  Vector diag(static_cast<Index>(n)), sub(static_cast<Index>(n > 1 ? n - 1 : 1));
  for (std::size_t k = 0; k < n; ++k) diag[static_cast<Index>(k)] = alpha[k];
  for (std::size_t k = 1; k < n; ++k) sub[static_cast<Index>(k - 1)] = std::sqrt(beta[k]);

  std::vector<double> nodes(n);
  if (n == 1) {
    nodes[0] = alpha[0];
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("gauss_from_recurrence: eigen-solver failed");
    for (std::size_t k = 0; k < n; ++k) nodes[k] = es.eigenvalues()[static_cast<Index>(k)];
  }

  Rule1d rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double t = nodes[k];
    for (int it = 0; it < 3; ++it) {
      const auto pe = eval_recurrence(alpha, beta, t);
      if (pe.deriv == 0.0) break;
      const double step = pe.value / pe.deriv;
      t -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(t))) break;
    }
    rule.nodes[k] = t;
    rule.weights[k] = 1.0 / eval_recurrence(alpha, beta, t).sum_sq;
  }
  return rule;
}

Rule1d gauss_legendre(int n) {
  require_positive(n);
  return cached(0, n, [n] {
    std::vector<double> alpha(static_cast<std::size_t>(n), 0.0), beta(static_cast<std::size_t>(n));
    beta[0] = 2.0;
    for (int k = 1; k < n; ++k) beta[static_cast<std::size_t>(k)] = double(k) * k / (4.0 * k * k - 1.0);
    return gauss_from_recurrence(alpha, beta);
  });
}

Rule1d gauss_hermite(int n) {
  require_positive(n);
  return cached(1, n, [n] {
    std::vector<double> alpha(static_cast<std::size_t>(n), 0.0), beta(static_cast<std::size_t>(n));
    beta[0] = 1.0;
    for (int k = 1; k < n; ++k) beta[static_cast<std::size_t>(k)] = k;
    auto rule = gauss_from_recurrence(alpha, beta);
    // symmetrize
    for (std::size_t i = 0, j = rule.nodes.size() - 1; i < j; ++i, --j) {
      const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
      const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
      rule.nodes[i] = -x;
      rule.nodes[j] = x;
      rule.weights[i] = rule.weights[j] = w;
    }
    if (rule.nodes.size() % 2 == 1) rule.nodes[rule.nodes.size() / 2] = 0.0;
    return rule;
  });
}

Rule1d half_range_hermite(int n) {
  require_positive(n);
  return cached(2, n, [n] {
    // Discretize exp(-t^2) dt on [0, 27] (exp(-27^2) underflows) by
    // composite Gauss-Legendre, then run the Stieltjes procedure on the
    // discrete measure.
    constexpr double kUpper = 27.0;
    constexpr int kPanels = 216;
    const auto& gl = gauss_legendre(24);
    const double h = kUpper / kPanels;
    std::vector<double> t, w;
    t.reserve(kPanels * gl.nodes.size());
    w.reserve(kPanels * gl.nodes.size());
    for (int p = 0; p < kPanels; ++p) {
      const double mid = (p + 0.5) * h;
      for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double x = mid + 0.5 * h * gl.nodes[k];
        const double wx = 0.5 * h * gl.weights[k] * std::exp(-x * x);
        if (wx > 0.0) {
          t.push_back(x);
          w.push_back(wx);
        }
      }
    }
    const auto m = t.size();
    std::vector<double> alpha(static_cast<std::size_t>(n)), beta(static_cast<std::size_t>(n));
    double b0 = 0.0;
    for (double wi : w) b0 += wi;
    beta[0] = b0;
    std::vector<double> q(m, 1.0 / std::sqrt(b0)), q_prev(m, 0.0), r(m);
    for (int k = 0; k < n; ++k) {
      double a = 0.0;
      for (std::size_t i = 0; i < m; ++i) a += w[i] * t[i] * q[i] * q[i];
      alpha[static_cast<std::size_t>(k)] = a;
      if (k + 1 == n) break;
      const double sb = k == 0 ? 0.0 : std::sqrt(beta[static_cast<std::size_t>(k)]);
      double nrm = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        r[i] = (t[i] - a) * q[i] - sb * q_prev[i];
        nrm += w[i] * r[i] * r[i];
      }
      beta[static_cast<std::size_t>(k + 1)] = nrm;
      const double inv = 1.0 / std::sqrt(nrm);
      for (std::size_t i = 0; i < m; ++i) {
        q_prev[i] = q[i];
        q[i] = r[i] * inv;
      }
    }
    return gauss_from_recurrence(alpha, beta);
  });
}

Rule1d gaussian_rule_1d(int n, std::vector<double> breakpoints) {
  require_positive(n);
  if (breakpoints.empty()) return gauss_hermite(n);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
  for (double b : breakpoints)
    if (!std::isfinite(b)) throw std::invalid_argument("gaussian_rule_1d: non-finite breakpoint");

  const auto& half = half_range_hermite(n);
  const auto& gl = gauss_legendre(n);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  Rule1d out;

  // (-inf, b0]: z = b0 - sqrt(2) t
  const double lo = breakpoints.front();
  for (std::size_t k = 0; k < half.nodes.size(); ++k) {
    const double t = half.nodes[k];
    out.nodes.push_back(lo - std::numbers::sqrt2 * t);
    out.weights.push_back(half.weights[k] * inv_sqrt_pi * std::exp(-0.5 * lo * lo + std::numbers::sqrt2 * lo * t));
  }
  for (std::size_t s = 0; s + 1 < breakpoints.size(); ++s) {
    const double mid = 0.5 * (breakpoints[s] + breakpoints[s + 1]);
    const double half_len = 0.5 * (breakpoints[s + 1] - breakpoints[s]);
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
      const double z = mid + half_len * gl.nodes[k];
      out.nodes.push_back(z);
      out.weights.push_back(half_len * gl.weights[k] * inv_sqrt_2pi * std::exp(-0.5 * z * z));
    }
  }
  // [b_last, inf): z = c + sqrt(2) t
  const double hi = breakpoints.back();
  for (std::size_t k = 0; k < half.nodes.size(); ++k) {
    const double t = half.nodes[k];
    out.nodes.push_back(hi + std::numbers::sqrt2 * t);
    out.weights.push_back(half.weights[k] * inv_sqrt_pi * std::exp(-0.5 * hi * hi - std::numbers::sqrt2 * hi * t));
  }
  return out;
}

RuleNd tensor_gauss_hermite(int q, int n) {
  if (q < 1) throw std::invalid_argument("tensor_gauss_hermite: q must be >= 1");
  const auto& gh = gauss_hermite(n);
  const auto per_axis = static_cast<std::size_t>(n);
  std::size_t total = 1;
  for (int k = 0; k < q; ++k) {
    if (total > (std::size_t{1} << 26) / per_axis) throw std::invalid_argument("tensor_gauss_hermite: too many nodes");
    total *= per_axis;
  }
  RuleNd rule{Matrix(q, static_cast<Index>(total)), std::vector<double>(total)};
  std::vector<std::size_t> idx(static_cast<std::size_t>(q), 0);
  for (std::size_t m = 0; m < total; ++m) {
    double w = 1.0;
    for (int k = 0; k < q; ++k) {
      rule.nodes(k, static_cast<Index>(m)) = gh.nodes[idx[static_cast<std::size_t>(k)]];
      w *= gh.weights[idx[static_cast<std::size_t>(k)]];
    }
    rule.weights[m] = w;
    for (int k = 0; k < q; ++k) {
      if (++idx[static_cast<std::size_t>(k)] < per_axis) break;
      idx[static_cast<std::size_t>(k)] = 0;
    }
  }
  return rule;
}

RuleNd as_rule_nd(const Rule1d& rule) {
  RuleNd out{Matrix(1, static_cast<Index>(rule.nodes.size())), rule.weights};
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) out.nodes(0, static_cast<Index>(k)) = rule.nodes[k];
  return out;
}

}  // namespace empmin::quadrature
