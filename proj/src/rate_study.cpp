#include "empmin/experiments.hpp"

#include "empmin/parallel.hpp"
#include "empmin/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace empmin::experiments {

void validate(const RateStudyConfig& config) {
  if (config.n_grid.size() < 4) throw std::invalid_argument("rate study: n_grid needs at least 4 entries");
  for (std::size_t k = 0; k < config.n_grid.size(); ++k) {
    if (config.n_grid[k] < 1) throw std::invalid_argument("rate study: sample sizes must be >= 1");
    if (k > 0 && config.n_grid[k] <= config.n_grid[k - 1])
      throw std::invalid_argument("rate study: n_grid must be strictly increasing");
  }
  if (config.replications < 1) throw std::invalid_argument("rate study: replications must be >= 1");
  if (!(config.censor_limit >= 0.0 && config.censor_limit <= 1.0))
    throw std::invalid_argument("rate study: censor_limit must lie in [0, 1]");
  optim::validate(config.optimizer);
}

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe out;
  if (v.empty()) return out;
  const double n = static_cast<double>(v.size());
  for (double x : v) out.mean += x;
  out.mean /= n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / (n - 1.0) / n);
  }
  return out;
}

}  // namespace

RateStudyResult run_rate_study(const RateStudyConfig& config) {
  validate(config);
  RateStudyResult result;
  result.q = static_cast<int>(noise_dim(config.problem));
  result.reference = config.reference ? *config.reference : reference_minimum(config.problem, config.reference_options);

  const auto family = problem_family(config.problem);
  const auto law = problem_law(config.problem);
  const Index d = family->decision_dim();
  const Vector x0 = config.x0 ? *config.x0 : Vector::Zero(d);
  if (x0.size() != d) throw std::invalid_argument("rate study: x0 has wrong dimension");

  const std::size_t R = config.replications;
  const std::size_t total = config.n_grid.size() * R;
  result.records.resize(total);
  const auto& ref = result.reference;

  parallel_for(total, config.jobs, [&](std::size_t idx) {
    const std::size_t n = config.n_grid[idx / R];
    const std::size_t r = idx % R;
    ReplicationRecord rec;
    rec.n = n;
    rec.replication = r;
    rec.seed = derive_seed(config.master_seed, n, r);
    try {
      objectives::EmpiricalObjective obj(family, measures::sample_iid(law, n, rec.seed));
      auto opts = config.optimizer;
      opts.seed = mix64(rec.seed);
      opts.record_trace = false;
      const auto res = optim::minimize(obj, x0, opts);
      rec.value = res.value;
      rec.value_err = std::abs(res.value - ref.v_star);
      rec.x_err_sq = (res.x_star - ref.x_star).squaredNorm();
      rec.max_abs_x = res.x_star.norm();
      rec.iters = res.iters;
      rec.converged = res.converged;
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      rec.value = rec.value_err = rec.x_err_sq = rec.max_abs_x = nan;
      rec.converged = false;
    }
    result.records[idx] = rec;
  });

  std::vector<std::pair<double, double>> value_series, x_series;
  for (std::size_t k = 0; k < config.n_grid.size(); ++k) {
    RatePoint pt;
    pt.n = config.n_grid[k];
    std::vector<double> verr, xerr, gap;
    for (std::size_t r = 0; r < R; ++r) {
      const auto& rec = result.records[k * R + r];
      if (!rec.converged) {
        ++pt.censored;
        continue;
      }
      ++pt.used;
      verr.push_back(rec.value_err);
      xerr.push_back(rec.x_err_sq);
      gap.push_back(ref.v_star - rec.value);
      pt.max_abs_x = std::max(pt.max_abs_x, rec.max_abs_x);
    }
    const auto mv = mean_se(verr), mx = mean_se(xerr), mg = mean_se(gap);
    pt.mean_value_err = mv.mean;
    pt.se_value_err = mv.se;
    pt.mean_x_err_sq = mx.mean;
    pt.se_x_err_sq = mx.se;
    pt.mean_gap = mg.mean;
    pt.se_gap = mg.se;
    const double rate = measures::rate_r_q(result.q, pt.n);
    pt.value_ratio = pt.mean_value_err / rate;
    pt.x_ratio = pt.mean_x_err_sq / rate;
    result.max_abs_x = std::max(result.max_abs_x, pt.max_abs_x);

    if (pt.used == 0 || static_cast<double>(pt.censored) >= config.censor_limit * static_cast<double>(R)) {
      if (pt.censored > 0 && result.valid) {
        result.valid = false;
        result.invalid_reason = "censored " + std::to_string(pt.censored) + " of " + std::to_string(R) +
                                " replications at n = " + std::to_string(pt.n);
      }
    }
    value_series.emplace_back(static_cast<double>(pt.n), pt.mean_value_err);
    x_series.emplace_back(static_cast<double>(pt.n), pt.mean_x_err_sq);
    result.points.push_back(pt);
  }

  auto safe_fit = [&](const std::vector<std::pair<double, double>>& s) {
    for (const auto& [n, e] : s)
      if (!(e > 0.0)) return LogLogFit{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), 0.0};
    return fit_loglog_slope(s);
  };
  result.value_fit = safe_fit(value_series);
  result.x_fit = safe_fit(x_series);
  return result;
}

}  // namespace empmin::experiments
