#pragma once

#include "empmin/optim.hpp"
#include "empmin/payoffs.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace empmin::cli {

enum class Command { rate_study, w1_study, price, lemma1, check };
enum class ProblemKind { synthetic_quadratic, is, nn };
enum class LawKind { standard_gaussian, uniform_cube, discrete };

struct SyntheticConfig {
  int q = 1;
  LawKind law = LawKind::standard_gaussian;
  std::vector<std::vector<double>> atoms;  // discrete law only
  std::vector<double> weights;             // discrete law only; empty = uniform
  bool operator==(const SyntheticConfig&) const = default;
};

struct OptionConfig {
  payoffs::Flavor flavor = payoffs::Flavor::call;
  double rate = 0.05;
  double maturity = 1.0;
  double strike = 100.0;
  std::vector<std::vector<double>> sigma{{0.2}};
  std::vector<double> spot{100.0};
  std::vector<double> basket_weights{1.0};
  bool operator==(const OptionConfig&) const = default;
};

/// Synthetic regression data: u_i ~ N(0, I_{d_0}) and every output
/// coordinate y_ik = tanh(sum_j u_ij / sqrt(d_0)) + noise * N(0, 1).
struct NetworkConfig {
  std::vector<int> layers{3, 4, 1};
  double ridge = 0.1;
  std::size_t dataset_size = 64;
  std::uint64_t dataset_seed = 1;
  double noise = 0.1;
  bool operator==(const NetworkConfig&) const = default;
};

struct ProblemConfig {
  ProblemKind kind = ProblemKind::synthetic_quadratic;
  SyntheticConfig synthetic;
  OptionConfig option;
  NetworkConfig network;
  bool operator==(const ProblemConfig&) const = default;
};

/// A translation is either an explicit vector or, when empty, the optimizer's
/// X_n* on a training sample ("auto").
struct PriceConfig {
  std::vector<std::optional<std::vector<double>>> translations{std::vector<double>{0.0}, std::nullopt};
  std::size_t eval_n = 1000000;
  std::size_t train_n = 100000;
  bool operator==(const PriceConfig&) const = default;
};

struct Lemma1Config {
  std::size_t n = 32;
  std::size_t instances = 100;
  std::vector<std::vector<double>> theta_grid;
  bool operator==(const Lemma1Config&) const = default;
};

struct W1Config {
  int q = 1;
  std::size_t reference_factor = 4;
  std::size_t cap = 8192;
  bool operator==(const W1Config&) const = default;
};

struct RunConfig {
  Command command = Command::check;
  std::uint64_t master_seed = 0;
  std::size_t replications = 20;
  std::vector<std::size_t> n_grid;
  double censor_limit = 0.05;
  std::string csv;   // empty: "<command>.csv"
  std::string json;  // empty: "<command>.json"
  ProblemConfig problem;
  optim::MinimizeOptions optimizer;
  PriceConfig price;
  Lemma1Config lemma1;
  W1Config w1;
  bool operator==(const RunConfig&) const = default;
};

/// Parse or validation failure; line() is 0 when no single line is at fault.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Parse the line-oriented format:
///
///   # comment
///   [section]
///   key = value
///
/// Unknown sections or keys, duplicates, malformed values and missing
/// command-specific keys raise ConfigError naming the key and line.
RunConfig parse_config(const std::string& text);

/// Canonical text with every key written out; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);

/// (section, key, value) triples in canonical order, as written by serialize().
std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> config_entries(
    const RunConfig& config);

std::string to_string(Command c);
std::string csv_name(const RunConfig& config);
std::string json_name(const RunConfig& config);

/// Round-trippable text for a real (17 significant digits, '.' decimal).
std::string format_real(double v);

}  // namespace empmin::cli
