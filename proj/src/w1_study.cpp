#include "empmin/experiments.hpp"

#include "empmin/parallel.hpp"
#include "empmin/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace empmin::experiments {

void validate(const W1StudyConfig& config) {
  if (config.q < 1 || config.q > 3) throw std::invalid_argument("w1 study: q must be 1, 2 or 3");
  if (config.n_grid.size() < 4) throw std::invalid_argument("w1 study: n_grid needs at least 4 entries");
  for (std::size_t k = 0; k < config.n_grid.size(); ++k) {
    if (config.n_grid[k] < 1) throw std::invalid_argument("w1 study: sample sizes must be >= 1");
    if (k > 0 && config.n_grid[k] <= config.n_grid[k - 1])
      throw std::invalid_argument("w1 study: n_grid must be strictly increasing");
  }
  if (config.replications < 1) throw std::invalid_argument("w1 study: replications must be >= 1");
  if (config.reference_factor < 1) throw std::invalid_argument("w1 study: reference_factor must be >= 1");
}

W1StudyResult w1_rate_study(const W1StudyConfig& config) {
  validate(config);
  if (config.q >= 2 && config.n_grid.back() * config.reference_factor > config.cap)
    throw measures::CapExceeded("w1 study: reference size " + std::to_string(config.n_grid.back() * config.reference_factor) +
                                " exceeds cap " + std::to_string(config.cap));

  const measures::UniformCube law{config.q};
  const std::size_t R = config.replications;
  W1StudyResult out;
  out.q = config.q;
  out.records.resize(config.n_grid.size() * R);

  parallel_for(out.records.size(), config.jobs, [&](std::size_t idx) {
    const std::size_t n = config.n_grid[idx / R];
    const std::size_t r = idx % R;
    const std::uint64_t seed = derive_seed(config.master_seed, n, r);
    const auto sample = measures::sample_iid(law, n, seed);
    double w1 = 0.0;
    if (config.q == 1) {
      w1 = measures::wasserstein1_to_uniform_1d(sample);
    } else {
      const auto reference = measures::sample_iid(law, config.reference_factor * n, mix64(seed ^ 0xC0FFEEULL));
      w1 = measures::wasserstein1_replicated(sample, reference, {config.cap});
    }
    out.records[idx] = {n, r, w1};
  });

  std::vector<std::pair<double, double>> series;
  for (std::size_t k = 0; k < config.n_grid.size(); ++k) {
    W1Point pt;
    pt.n = config.n_grid[k];
    double s = 0.0, ss = 0.0;
    for (std::size_t r = 0; r < R; ++r) s += out.records[k * R + r].w1;
    pt.mean = s / static_cast<double>(R);
    for (std::size_t r = 0; r < R; ++r) {
      const double dlt = out.records[k * R + r].w1 - pt.mean;
      ss += dlt * dlt;
    }
    pt.se = R > 1 ? std::sqrt(ss / static_cast<double>(R - 1) / static_cast<double>(R)) : 0.0;
    out.points.push_back(pt);
    series.emplace_back(static_cast<double>(pt.n), pt.mean);
  }
  out.fit = fit_loglog_slope(series);
  return out;
}

}  // namespace empmin::experiments
