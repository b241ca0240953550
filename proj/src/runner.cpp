#include "empmin/runner.hpp"

#include "empmin/parallel.hpp"
#include "empmin/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace empmin::cli {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

/// Non-finite reals become null.
ordered_json real(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

std::string csv_real(double v) { return std::isnan(v) ? "nan" : format_real(v); }

payoffs::BasketOptionSpec option_spec(const OptionConfig& o) {
  payoffs::BasketOptionSpec s;
  const auto d = static_cast<Index>(o.spot.size());
  s.r = o.rate;
  s.T = o.maturity;
  s.K = o.strike;
  s.flavor = o.flavor;
  s.sigma.resize(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) s.sigma(i, j) = o.sigma[i][j];
  s.s0 = to_vector(o.spot);
  s.a = to_vector(o.basket_weights);
  payoffs::validate(s);
  return s;
}

measures::EmpiricalMeasure network_dataset(const NetworkConfig& c) {
  const Index d0 = c.layers.front();
  const Index dk = c.layers.back();
  Matrix pts(d0 + dk, static_cast<Index>(c.dataset_size));
  Rng rng(c.dataset_seed);
  for (Index i = 0; i < pts.cols(); ++i) {
    double s = 0.0;
    for (Index j = 0; j < d0; ++j) {
      pts(j, i) = rng.normal();
      s += pts(j, i);
    }
    const double target = std::tanh(s / std::sqrt(static_cast<double>(d0)));
    for (Index k = 0; k < dk; ++k) pts(d0 + k, i) = target + c.noise * rng.normal();
  }
  return measures::EmpiricalMeasure(std::move(pts), c.dataset_seed);
}

ordered_json fit_json(const experiments::LogLogFit& f) {
  return {{"slope", real(f.slope)}, {"intercept", real(f.intercept)}, {"r_squared", real(f.r_squared)}};
}

ordered_json reference_json(const experiments::ReferenceSolution& r) {
  return {{"x_star", to_std(r.x_star)},
          {"v_star", real(r.v_star)},
          {"method", experiments::to_string(r.method)},
          {"quadrature_nodes", r.quadrature_nodes},
          {"grad_norm", real(r.grad_norm)}};
}

Artifacts rate_study(const RunConfig& cfg, std::uint64_t seed, const RunOptions& opts) {
  experiments::RateStudyConfig rc;
  rc.problem = build_problem(cfg.problem);
  rc.n_grid = cfg.n_grid;
  rc.replications = cfg.replications;
  rc.master_seed = seed;
  rc.optimizer = effective_optimizer(cfg);
  rc.censor_limit = cfg.censor_limit;
  rc.jobs = opts.jobs;
  const auto res = experiments::run_rate_study(rc);

  Artifacts out;
  out.csv = "n,replication,value_err,x_err_sq,converged\n";
  for (const auto& r : res.records)
    out.csv += std::to_string(r.n) + "," + std::to_string(r.replication) + "," + csv_real(r.value_err) + "," +
               csv_real(r.x_err_sq) + "," + (r.converged ? "true" : "false") + "\n";

  ordered_json points = ordered_json::array();
  for (const auto& p : res.points)
    points.push_back({{"n", p.n},
                      {"used", p.used},
                      {"censored", p.censored},
                      {"rate", measures::rate_r_q(res.q, p.n)},
                      {"mean_value_err", real(p.mean_value_err)},
                      {"se_value_err", real(p.se_value_err)},
                      {"mean_x_err_sq", real(p.mean_x_err_sq)},
                      {"se_x_err_sq", real(p.se_x_err_sq)},
                      {"mean_gap", real(p.mean_gap)},
                      {"se_gap", real(p.se_gap)},
                      {"value_ratio", real(p.value_ratio)},
                      {"x_ratio", real(p.x_ratio)},
                      {"max_abs_x", real(p.max_abs_x)}});
  ordered_json results = {{"q", res.q},
                          {"reference", reference_json(res.reference)},
                          {"value_fit", fit_json(res.value_fit)},
                          {"x_fit", fit_json(res.x_fit)},
                          {"valid", res.valid},
                          {"invalid_reason", res.invalid_reason},
                          {"max_abs_x", real(res.max_abs_x)},
                          {"points", points}};
  out.json = results.dump();
  if (!res.valid) {
    out.exit_code = exit_failed;
    out.message = "invalid study: " + res.invalid_reason;
  }
  return out;
}

Artifacts w1_study(const RunConfig& cfg, std::uint64_t seed, const RunOptions& opts) {
  experiments::W1StudyConfig wc;
  wc.q = cfg.w1.q;
  wc.n_grid = cfg.n_grid;
  wc.replications = cfg.replications;
  wc.master_seed = seed;
  wc.reference_factor = cfg.w1.reference_factor;
  wc.cap = cfg.w1.cap;
  wc.jobs = opts.jobs;
  const auto res = experiments::w1_rate_study(wc);

  Artifacts out;
  out.csv = "n,replication,w1\n";
  for (const auto& r : res.records)
    out.csv += std::to_string(r.n) + "," + std::to_string(r.replication) + "," + csv_real(r.w1) + "\n";
  ordered_json points = ordered_json::array();
  for (const auto& p : res.points)
    points.push_back({{"n", p.n}, {"mean", real(p.mean)}, {"se", real(p.se)}, {"rate", measures::rate_r_q(res.q, p.n)}});
  out.json = ordered_json{{"q", res.q}, {"fit", fit_json(res.fit)}, {"points", points}}.dump();
  return out;
}

Artifacts price(const RunConfig& cfg, std::uint64_t seed) {
  const auto spec = option_spec(cfg.problem.option);
  const Index d = spec.dim();
  const measures::StandardGaussian law{d};

  std::optional<optim::MinimizeResult> trained;
  auto train = [&]() -> const optim::MinimizeResult& {
    if (!trained) {
      const objectives::EmpiricalObjective obj(objectives::make_is_family(spec),
                                               measures::sample_iid(law, cfg.price.train_n,
                                                                    derive_seed(seed, cfg.price.train_n, 0)));
      trained = optim::minimize(obj, Vector::Zero(d), effective_optimizer(cfg));
    }
    return *trained;
  };

  const auto eval = measures::sample_iid(law, cfg.price.eval_n, derive_seed(seed, cfg.price.eval_n, 1));
  const double base_var = objectives::estimator_variance(spec, Vector::Zero(d), eval);

  Artifacts out;
  out.csv = "x,estimate,std_error,variance_ratio\n";
  ordered_json rows = ordered_json::array();
  for (const auto& t : cfg.price.translations) {
    const Vector x = t ? to_vector(*t) : train().x_star;
    const auto st = objectives::translated_stats(spec, x, eval);
    const double ratio = base_var > 0.0 ? st.variance / base_var : std::nan("");
    std::string xs;
    for (Index i = 0; i < d; ++i) xs += (i ? " " : "") + format_real(x(i));
    out.csv += xs + "," + csv_real(st.mean) + "," + csv_real(st.std_error) + "," + csv_real(ratio) + "\n";
    rows.push_back({{"x", to_std(x)},
                    {"source", t ? "explicit" : "optimizer"},
                    {"estimate", real(st.mean)},
                    {"std_error", real(st.std_error)},
                    {"variance", real(st.variance)},
                    {"variance_ratio", real(ratio)}});
  }
  ordered_json results = {{"eval_n", cfg.price.eval_n},
                          {"eval_seed", derive_seed(seed, cfg.price.eval_n, 1)},
                          {"train_n", cfg.price.train_n},
                          {"train_seed", derive_seed(seed, cfg.price.train_n, 0)},
                          {"translations", rows}};
  if (trained) {
    results["optimizer"] = {{"x_star", to_std(trained->x_star)},
                            {"value", real(trained->value)},
                            {"grad_norm", real(trained->grad_norm)},
                            {"iters", trained->iters},
                            {"converged", trained->converged}};
  }
  if (d == 1 && spec.a(0) == 1.0) {
    const double exact = payoffs::bs_price_1d(spec);
    results["closed_form"] = real(exact);
    for (auto& r : results["translations"]) {
      const double se = r["std_error"].is_number() ? r["std_error"].get<double>() : 0.0;
      const double est = r["estimate"].is_number() ? r["estimate"].get<double>() : std::nan("");
      r["z_score"] = real(se > 0.0 ? (est - exact) / se : std::nan(""));
    }
  }
  out.json = results.dump();
  return out;
}

Artifacts lemma1(const RunConfig& cfg, std::uint64_t seed, const RunOptions& opts) {
  const auto problem = build_problem(cfg.problem);
  const auto ref = experiments::reference_minimum(problem);
  std::vector<Vector> grid;
  for (const auto& g : cfg.lemma1.theta_grid) grid.push_back(to_vector(g));
  const auto o = effective_optimizer(cfg);

  const std::size_t count = cfg.lemma1.instances;
  std::vector<experiments::Lemma1Report> reports(count);
  std::vector<std::uint64_t> seeds(count);
  parallel_for(count, opts.jobs, [&](std::size_t i) {
    seeds[i] = derive_seed(seed, cfg.lemma1.n, i);
    reports[i] = experiments::lemma1_check(problem, cfg.lemma1.n, seeds[i], grid, o, ref);
  });

  Artifacts out;
  out.csv = "instance,seed,lhs,rhs,holds\n";
  std::size_t held = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const auto& r = reports[i];
    held += r.holds ? 1 : 0;
    out.csv += std::to_string(i) + "," + std::to_string(seeds[i]) + "," + csv_real(r.lhs) + "," + csv_real(r.rhs) +
               "," + (r.holds ? "true" : "false") + "\n";
  }
  out.json = ordered_json{{"n", cfg.lemma1.n},
                          {"instances", count},
                          {"held", held},
                          {"grid_size", grid.size() + 2},
                          {"reference", reference_json(ref)}}
                 .dump();
  if (held != count) {
    out.exit_code = exit_failed;
    out.message = "deviation bound failed in " + std::to_string(count - held) + " of " + std::to_string(count) +
                  " instances";
  }
  return out;
}

Artifacts check(std::uint64_t seed) {
  const auto results = experiments::run_invariant_suite(seed);
  Artifacts out;
  out.csv = "check,passed,detail\n";
  ordered_json rows = ordered_json::array();
  std::size_t failed = 0;
  for (const auto& c : results) {
    failed += c.passed ? 0 : 1;
    out.csv += csv_field(c.name) + "," + (c.passed ? "true" : "false") + "," + csv_field(c.detail) + "\n";
    rows.push_back({{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  out.json = ordered_json{{"checks", rows}, {"failed", failed}}.dump();
  if (failed) {
    out.exit_code = exit_failed;
    out.message = std::to_string(failed) + " invariant check(s) failed";
  }
  return out;
}

fs::path resolve(const std::string& out_dir, const std::string& name) {
  const fs::path p(name);
  return p.is_absolute() ? p : fs::path(out_dir) / p;
}

void write_file(const fs::path& path, const std::string& body) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f << body;
    if (!f.flush()) throw std::runtime_error("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

}  // namespace

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

experiments::Problem build_problem(const ProblemConfig& c) {
  switch (c.kind) {
    case ProblemKind::is:
      return experiments::IsProblem{option_spec(c.option)};
    case ProblemKind::nn: {
      objectives::MlpSpec spec;
      for (int l : c.network.layers) spec.layers.push_back(l);
      spec.lambda = c.network.ridge;
      objectives::validate(spec);
      return experiments::NnProblem{spec, network_dataset(c.network)};
    }
    case ProblemKind::synthetic_quadratic:
      break;
  }
  const auto& s = c.synthetic;
  switch (s.law) {
    case LawKind::standard_gaussian:
      return experiments::QuadraticProblem{measures::StandardGaussian{s.q}};
    case LawKind::uniform_cube:
      return experiments::QuadraticProblem{measures::UniformCube{s.q}};
    case LawKind::discrete:
      break;
  }
  measures::Discrete law;
  law.atoms.resize(s.q, static_cast<Index>(s.atoms.size()));
  for (std::size_t j = 0; j < s.atoms.size(); ++j)
    for (int i = 0; i < s.q; ++i) law.atoms(i, static_cast<Index>(j)) = s.atoms[j][static_cast<std::size_t>(i)];
  law.weights = s.weights.empty() ? std::vector<double>(s.atoms.size(), 1.0 / static_cast<double>(s.atoms.size()))
                                  : s.weights;
  measures::validate(law);
  return experiments::QuadraticProblem{law};
}

optim::MinimizeOptions effective_optimizer(const RunConfig& config) {
  auto o = config.optimizer;
  if (config.problem.kind == ProblemKind::nn) o.method = optim::Method::gradient_descent;
  return o;
}

Artifacts execute(const RunConfig& config, const RunOptions& options) {
  const std::uint64_t seed = options.seed_override.value_or(config.master_seed);
  Artifacts out;
  try {
    switch (config.command) {
      case Command::rate_study:
        out = rate_study(config, seed, options);
        break;
      case Command::w1_study:
        out = w1_study(config, seed, options);
        break;
      case Command::price:
        out = price(config, seed);
        break;
      case Command::lemma1:
        out = lemma1(config, seed, options);
        break;
      case Command::check:
        out = check(seed);
        break;
    }
  } catch (const std::invalid_argument& e) {
    return {exit_config_error, {}, {}, e.what()};
  } catch (const std::exception& e) {
    return {exit_failed, {}, {}, e.what()};
  }

  ordered_json echo = ordered_json::object();
  for (const auto& [section, entries] : config_entries(config)) {
    ordered_json block = ordered_json::object();
    for (const auto& [k, v] : entries) block[k] = v;
    echo[section] = block;
  }
  const auto o = effective_optimizer(config);
  ordered_json summary = {{"tool", kToolName},
                          {"version", kToolVersion},
                          {"command", to_string(config.command)},
                          {"master_seed", seed},
                          {"master_seed_source", options.seed_override ? "EMPMIN_SEED" : "config"},
                          {"exit_code", out.exit_code},
                          {"optimizer_method", o.method == optim::Method::newton ? "newton" : "gradient-descent"},
                          {"config", echo},
                          {"results", ordered_json::parse(out.json)}};
  out.json = summary.dump(2) + "\n";
  return out;
}

int run(const RunConfig& config, const RunOptions& options) {
  const fs::path csv = resolve(options.out_dir, csv_name(config));
  const fs::path json = resolve(options.out_dir, json_name(config));
  Artifacts art = execute(config, options);
  std::error_code ec;
  if (art.exit_code != exit_ok) {
    fs::remove(csv, ec);
    fs::remove(json, ec);
    if (options.log) *options.log << kToolName << ": " << art.message << "\n";
    return art.exit_code;
  }
  try {
    write_file(csv, art.csv);
    write_file(json, art.json);
  } catch (const std::exception& e) {
    fs::remove(csv, ec);
    fs::remove(json, ec);
    fs::remove(csv.string() + ".tmp", ec);
    fs::remove(json.string() + ".tmp", ec);
    if (options.log) *options.log << kToolName << ": " << e.what() << "\n";
    return exit_failed;
  }
  if (options.log) *options.log << kToolName << ": wrote " << csv.string() << " and " << json.string() << "\n";
  return exit_ok;
}

}  // namespace empmin::cli
