#include "empmin/config.hpp"
#include "empmin/rng.hpp"
#include "empmin/runner.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace empmin;
using namespace empmin::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("empmin_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::size_t error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

std::string error_text(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

double any_real(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

RunConfig random_config(Rng& rng) {
  RunConfig c;
  const int cmd = static_cast<int>(rng.uniform() * 5);
  c.command = static_cast<Command>(cmd);
  c.master_seed = mix64(static_cast<std::uint64_t>(rng.uniform() * 1e18));
  c.replications = 1 + static_cast<std::size_t>(rng.uniform() * 300);
  std::size_t n = 2 + static_cast<std::size_t>(rng.uniform() * 50);
  const std::size_t len = 4 + static_cast<std::size_t>(rng.uniform() * 6);
  for (std::size_t k = 0; k < len; ++k) {
    c.n_grid.push_back(n);
    n += 1 + static_cast<std::size_t>(rng.uniform() * 1000);
  }
  c.censor_limit = rng.uniform();
  if (rng.uniform() < 0.5) c.csv = "out_" + std::to_string(cmd) + ".csv";
  if (rng.uniform() < 0.5) c.json = "summary.json";

  const int kind = cmd == 2 ? 1 : static_cast<int>(rng.uniform() * 3);
  c.problem.kind = static_cast<ProblemKind>(kind);
  auto& s = c.problem.synthetic;
  s.q = 1 + static_cast<int>(rng.uniform() * 3);
  s.law = static_cast<LawKind>(static_cast<int>(rng.uniform() * 3));
  if (s.law == LawKind::discrete) {
    const int m = 1 + static_cast<int>(rng.uniform() * 4);
    for (int j = 0; j < m; ++j) {
      std::vector<double> a;
      for (int i = 0; i < s.q; ++i) a.push_back(rng.normal());
      s.atoms.push_back(a);
    }
    if (rng.uniform() < 0.5) {
      // weights that sum to 1 exactly in floating point
      s.weights.assign(static_cast<std::size_t>(m), 0.0);
      s.weights[0] = 1.0;
      if (m > 1) {
        s.weights[0] = 0.5;
        s.weights[1] = 0.5;
      }
    }
  }
  auto& o = c.problem.option;
  const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform() * 3);
  o.flavor = rng.uniform() < 0.5 ? payoffs::Flavor::call : payoffs::Flavor::put;
  o.rate = any_real(rng, -0.02, 0.1);
  o.maturity = any_real(rng, 0.1, 3.0);
  o.strike = any_real(rng, 50, 150);
  o.sigma.assign(d, std::vector<double>(d, 0.0));
  o.spot.clear();
  o.basket_weights.clear();
  for (std::size_t i = 0; i < d; ++i) {
    o.sigma[i][i] = any_real(rng, 0.1, 0.4);
    o.spot.push_back(any_real(rng, 80, 120));
    o.basket_weights.push_back(any_real(rng, 0.1, 1.0));
  }
  if (d >= 2) o.sigma[0][1] = o.sigma[1][0] = 0.01;
  c.price.translations.clear();
  const int nt = 1 + static_cast<int>(rng.uniform() * 3);
  for (int t = 0; t < nt; ++t) {
    if (rng.uniform() < 0.3) {
      c.price.translations.emplace_back(std::nullopt);
    } else {
      std::vector<double> x;
      for (std::size_t i = 0; i < d; ++i) x.push_back(rng.normal());
      c.price.translations.emplace_back(x);
    }
  }
  c.price.eval_n = 2 + static_cast<std::size_t>(rng.uniform() * 1e6);
  c.price.train_n = 1 + static_cast<std::size_t>(rng.uniform() * 1e5);

  auto& nn = c.problem.network;
  nn.layers.clear();
  const int depth = 1 + static_cast<int>(rng.uniform() * 3);
  for (int k = 0; k <= depth; ++k) nn.layers.push_back(1 + static_cast<int>(rng.uniform() * 5));
  nn.ridge = any_real(rng, 1e-3, 10);
  nn.dataset_size = 1 + static_cast<std::size_t>(rng.uniform() * 500);
  nn.dataset_seed = static_cast<std::uint64_t>(rng.uniform() * 1e9);
  nn.noise = any_real(rng, 0, 1);

  c.optimizer.method = rng.uniform() < 0.5 ? optim::Method::newton : optim::Method::gradient_descent;
  c.optimizer.max_iters = 1 + static_cast<std::size_t>(rng.uniform() * 10000);
  c.optimizer.grad_tol = std::exp(any_real(rng, -30, -2));
  c.optimizer.armijo.c = any_real(rng, 1e-6, 0.5);
  c.optimizer.armijo.shrink = any_real(rng, 0.1, 0.9);
  c.optimizer.armijo.initial_step = any_real(rng, 0.1, 10);
  c.optimizer.multistart = 1 + static_cast<std::size_t>(rng.uniform() * 10);
  c.optimizer.start_box_radius = any_real(rng, 0.1, 5);
  c.optimizer.record_trace = rng.uniform() < 0.5;

  c.lemma1.n = 1 + static_cast<std::size_t>(rng.uniform() * 100);
  c.lemma1.instances = 1 + static_cast<std::size_t>(rng.uniform() * 200);
  const int dim = kind == 1 ? static_cast<int>(d) : s.q;
  if (kind != 2)
    for (int g = 0; g < static_cast<int>(rng.uniform() * 4); ++g) {
      std::vector<double> x;
      for (int i = 0; i < dim; ++i) x.push_back(rng.normal());
      c.lemma1.theta_grid.push_back(x);
    }
  c.w1.q = 1 + static_cast<int>(rng.uniform() * 3);
  c.w1.reference_factor = 1 + static_cast<std::size_t>(rng.uniform() * 8);
  c.w1.cap = 1 + static_cast<std::size_t>(rng.uniform() * 10000);
  return c;
}

}  // namespace

TEST_CASE("minimal rate-study config gets the documented defaults") {
  const auto c = parse_config(
      "[run]\n"
      "command = rate-study\n"
      "n_grid = 64..8192\n"
      "master_seed = 42\n"
      "[problem]\n"
      "kind = synthetic-quadratic\n"
      "[synthetic]\n"
      "q = 1\n");
  CHECK(c.command == Command::rate_study);
  CHECK(c.master_seed == 42);
  CHECK(c.n_grid == std::vector<std::size_t>{64, 128, 256, 512, 1024, 2048, 4096, 8192});
  CHECK(c.replications == 20);
  CHECK(c.censor_limit == 0.05);
  CHECK(c.problem.synthetic.law == LawKind::standard_gaussian);
  CHECK(c.optimizer == optim::MinimizeOptions{});
  CHECK(csv_name(c) == "rate-study.csv");
  CHECK(json_name(c) == "rate-study.json");
}

TEST_CASE("config errors name the key and the line") {
  const std::string bad = "[run]\ncommand = check\nreplications = -3\n";
  CHECK(error_line(bad) == 3);
  CHECK(error_text(bad).find("replications") != std::string::npos);
  CHECK(error_text(bad).find("line 3") != std::string::npos);

  CHECK(error_line("[run]\ncommand = check\nbogus = 1\n") == 3);
  CHECK(error_text("[run]\ncommand = check\nbogus = 1\n").find("bogus") != std::string::npos);
  CHECK(error_line("[run]\ncommand = check\n[nowhere]\n") == 3);
  CHECK(error_line("[run]\ncommand = check\ncommand = price\n") == 3);
  CHECK(error_line("[run]\ncommand = check\n[optimizer]\ngrad_tol = fast\n") == 4);
  CHECK(error_line("[run]\ncommand = check\n[optimizer]\nrecord_trace = yes\n") == 4);
  CHECK(error_line("[run]\ncommand = check\n[optimizer]\narmijo_shrink = 1.5\n") == 4);
  CHECK(error_line("[run]\ncommand = check\n[problem]\nkind = circle\n") == 4);
  CHECK(error_line("command = check\n") == 1);
  CHECK(error_line("[run]\ncommand check\n") == 2);
  CHECK(error_line("[run]\ncommand = check\n[run\n") == 3);
  CHECK(error_line("[run]\ncommand = check\nreplications = 2.5\n") == 3);
  CHECK(error_line("[run]\ncommand = check\nn_grid = 64..100\n") == 3);

  // missing required keys
  CHECK(error_text("[run]\nmaster_seed = 1\n").find("command") != std::string::npos);
  CHECK(error_text("[run]\ncommand = rate-study\nmaster_seed = 1\n").find("n_grid") != std::string::npos);
  CHECK(error_text("[run]\ncommand = w1-study\nn_grid = 64..512\n").find("master_seed") != std::string::npos);
  CHECK(error_text("[run]\ncommand = price\n").find("master_seed") != std::string::npos);
  CHECK(error_text("[run]\ncommand = rate-study\nmaster_seed = 1\nn_grid = 64, 128\n").find("n_grid") !=
        std::string::npos);
  CHECK(error_line("[run]\ncommand = price\nmaster_seed = 1\n[problem]\nkind = nn\n") == 5);
  CHECK(error_line("[run]\ncommand = check\n[option]\nspot = 100, 100\n") == 0);
  CHECK(error_line("[run]\ncommand = check\n[problem]\nkind = is\n[option]\nsigma = 0.2, 0.4; 0.4, 0.2\n"
                   "spot = 1, 1\nbasket_weights = 1, 1\n") == 6);
}

TEST_CASE("comments, blank lines and explicit lists parse") {
  const auto c = parse_config(
      "# a study\n"
      "\n"
      "[run]\n"
      "command = w1-study   # trailing comment\n"
      "master_seed = 7\n"
      "n_grid = 10, 20, 40, 80\n"
      "[w1]\n"
      "q = 3\n"
      "[price]\n"
      "translations = 0; auto; 0.5\n");
  CHECK(c.n_grid == std::vector<std::size_t>{10, 20, 40, 80});
  CHECK(c.w1.q == 3);
  REQUIRE(c.price.translations.size() == 3);
  CHECK(!c.price.translations[1]);
  CHECK(c.price.translations[2]->at(0) == 0.5);
}

TEST_CASE("serialize round-trips 100 random valid configs") {
  Rng rng(20240);
  for (int i = 0; i < 100; ++i) {
    const RunConfig c = random_config(rng);
    const std::string text = serialize(c);
    RunConfig back;
    REQUIRE_NOTHROW(back = parse_config(text));
    CHECK(back == c);
    CHECK(serialize(back) == text);
  }
  RunConfig d;
  CHECK(parse_config(serialize(d)) == d);
}

TEST_CASE("format_real round-trips") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::exp(40.0 * rng.normal());
    CHECK(std::strtod(format_real(v).c_str(), nullptr) == v);
  }
  CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("csv fields are quoted when needed") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("price at x = 0 is plain Monte Carlo with variance ratio 1") {
  auto c = parse_config(
      "[run]\ncommand = price\nmaster_seed = 3\n[problem]\nkind = is\n[price]\ntranslations = 0; 0.5\n"
      "eval_n = 20000\ntrain_n = 1000\n");
  const auto art = execute(c, {});
  REQUIRE(art.exit_code == exit_ok);
  std::istringstream rows(art.csv);
  std::string header, first, second;
  std::getline(rows, header);
  std::getline(rows, first);
  std::getline(rows, second);
  CHECK(header == "x,estimate,std_error,variance_ratio");
  CHECK(first.substr(first.rfind(',') + 1) == "1");

  const auto spec = payoffs::single_asset(100, 100, 0.05, 0.2, 1, payoffs::Flavor::call);
  const auto eval = measures::sample_iid(measures::StandardGaussian{1}, 20000, derive_seed(3, 20000, 1));
  double plain = 0.0;
  for (Index i = 0; i < eval.size(); ++i) plain += payoffs::payoff_eval(spec, eval.point(i));
  plain /= 20000.0;
  const auto j = nlohmann::json::parse(art.json);
  CHECK(j["results"]["translations"][0]["estimate"].get<double>() == doctest::Approx(plain).epsilon(1e-14));
  CHECK(j["results"]["translations"][0]["variance_ratio"].get<double>() == 1.0);
  CHECK(j["results"].contains("closed_form"));
  CHECK(j["master_seed_source"] == "config");
}

TEST_CASE("JSON summary echoes the full config and the seed source") {
  const auto c = parse_config("[run]\ncommand = check\nmaster_seed = 5\n");
  RunOptions o;
  o.seed_override = 77;
  const auto art = execute(c, o);
  REQUIRE(art.exit_code == exit_ok);
  const auto j = nlohmann::json::parse(art.json);
  CHECK(j["tool"] == "empmin");
  CHECK(j["version"] == kToolVersion);
  CHECK(j["master_seed"] == 77);
  CHECK(j["master_seed_source"] == "EMPMIN_SEED");
  for (const auto& [section, entries] : config_entries(c))
    for (const auto& [k, v] : entries) CHECK(j["config"][section][k] == v);
  CHECK(j["config"]["run"]["master_seed"] == "5");
}

TEST_CASE("run writes artifacts, removes them on failure, and is job-count independent") {
  const auto dir = temp_dir("run");
  auto c = parse_config(
      "[run]\ncommand = rate-study\nmaster_seed = 9\nreplications = 6\nn_grid = 32..256\n"
      "[problem]\nkind = is\n");
  RunOptions o;
  o.out_dir = dir.string();
  o.jobs = 1;
  REQUIRE(run(c, o) == exit_ok);
  const std::string csv1 = slurp(dir / "rate-study.csv"), json1 = slurp(dir / "rate-study.json");
  o.jobs = 8;
  REQUIRE(run(c, o) == exit_ok);
  CHECK(slurp(dir / "rate-study.csv") == csv1);
  CHECK(slurp(dir / "rate-study.json") == json1);

  // one header line plus one row per (n, replication)
  std::size_t lines = 0;
  for (char ch : csv1) lines += ch == '\n';
  CHECK(lines == 1 + 4 * 6);
  CHECK(csv1.rfind("n,replication,value_err,x_err_sq,converged\n", 0) == 0);

  // a censored study exits 2 and leaves nothing behind
  c.optimizer.max_iters = 1;
  CHECK(run(c, o) == exit_failed);
  CHECK(!fs::exists(dir / "rate-study.csv"));
  CHECK(!fs::exists(dir / "rate-study.json"));

  // a cap too small for the study fails without output
  auto tiny = parse_config("[run]\ncommand = w1-study\nmaster_seed = 1\nn_grid = 8..64\n[w1]\nq = 2\ncap = 16\n");
  CHECK(run(tiny, o) != exit_ok);
  CHECK(!fs::exists(dir / "w1-study.csv"));
  fs::remove_all(dir);
}

TEST_CASE("check command succeeds") {
  const auto dir = temp_dir("check");
  RunOptions o;
  o.out_dir = dir.string();
  CHECK(run(parse_config("[run]\ncommand = check\n"), o) == exit_ok);
  const std::string csv = slurp(dir / "check.csv");
  CHECK(csv.rfind("check,passed,detail\n", 0) == 0);
  CHECK(csv.find(",false,") == std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("lemma1 and w1-study commands") {
  auto l = parse_config(
      "[run]\ncommand = lemma1\nmaster_seed = 4\n[problem]\nkind = synthetic-quadratic\n[synthetic]\nq = 2\n"
      "law = discrete\natoms = 0, 0; 1, 1; 2, 0\n[lemma1]\nn = 10\ninstances = 25\ntheta_grid = 0, 0; 1, 0\n");
  const auto a = execute(l, {});
  CHECK(a.exit_code == exit_ok);
  CHECK(a.csv.find(",false\n") == std::string::npos);
  const auto j = nlohmann::json::parse(a.json);
  CHECK(j["results"]["held"] == 25);

  auto w = parse_config("[run]\ncommand = w1-study\nmaster_seed = 4\nreplications = 3\nn_grid = 16..128\n");
  const auto b = execute(w, {});
  CHECK(b.exit_code == exit_ok);
  CHECK(b.csv.rfind("n,replication,w1\n", 0) == 0);
}

TEST_CASE("network problems run with gradient descent") {
  auto c = parse_config(
      "[run]\ncommand = rate-study\nmaster_seed = 2\nreplications = 3\nn_grid = 8..64\n[problem]\nkind = nn\n"
      "[network]\nlayers = 2, 2, 1\ndataset_size = 16\n[optimizer]\nmax_iters = 20000\n");
  CHECK(effective_optimizer(c).method == optim::Method::gradient_descent);
  const auto art = execute(c, {});
  CHECK(art.exit_code == exit_ok);
  const auto j = nlohmann::json::parse(art.json);
  CHECK(j["optimizer_method"] == "gradient-descent");
}
