#include "empmin/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace empmin::cli {

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + message : "config: " + message),
      line_(line) {}

namespace {

/// A malformed value; the parser adds key and line.
struct ValueError {
  std::string what;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::uint64_t parse_u64(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw ValueError{"expected a nonnegative integer, got '" + s + "'"};
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ValueError{"integer out of range: '" + s + "'"};
  return v;
}

std::size_t parse_count(const std::string& s, std::size_t min_value) {
  std::uint64_t v = 0;
  try {
    v = parse_u64(s);
  } catch (const ValueError&) {
    throw ValueError{"expected an integer >= " + std::to_string(min_value) + ", got '" + s + "'"};
  }
  if (v < min_value) throw ValueError{"expected an integer >= " + std::to_string(min_value) + ", got '" + s + "'"};
  return static_cast<std::size_t>(v);
}

double parse_real(const std::string& s) {
  if (s.empty()) throw ValueError{"expected a real number, got ''"};
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    throw ValueError{"expected a finite real number, got '" + s + "'"};
  return v;
}

double parse_positive(const std::string& s) {
  const double v = parse_real(s);
  if (!(v > 0.0)) throw ValueError{"expected a positive real number, got '" + s + "'"};
  return v;
}

double parse_nonnegative(const std::string& s) {
  const double v = parse_real(s);
  if (!(v >= 0.0)) throw ValueError{"expected a nonnegative real number, got '" + s + "'"};
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ValueError{"expected true or false, got '" + s + "'"};
}

std::vector<double> parse_vector(const std::string& s) {
  if (s.empty()) throw ValueError{"expected a comma-separated list of reals, got ''"};
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_real(part));
  return out;
}

std::vector<std::vector<double>> parse_rows(const std::string& s) {
  std::vector<std::vector<double>> rows;
  if (s.empty()) return rows;
  for (const auto& part : split(s, ';')) rows.push_back(parse_vector(part));
  return rows;
}

std::vector<std::size_t> parse_n_grid(const std::string& s) {
  std::vector<std::size_t> out;
  if (s.empty()) return out;
  if (const auto dots = s.find(".."); dots != std::string::npos) {
    const std::size_t lo = parse_count(trim(s.substr(0, dots)), 1);
    const std::size_t hi = parse_count(trim(s.substr(dots + 2)), 1);
    if (hi < lo) throw ValueError{"range '" + s + "' is empty"};
    std::size_t v = lo;
    while (v < hi) {
      out.push_back(v);
      v *= 2;
    }
    if (v != hi) throw ValueError{"range '" + s + "': upper end must be the lower end times a power of two"};
    out.push_back(hi);
    return out;
  }
  for (const auto& part : split(s, ',')) out.push_back(parse_count(part, 1));
  return out;
}

std::string join_reals(const std::vector<double>& v, const char* sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_real(v[i]);
  }
  return out;
}

std::string join_rows(const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) out += "; ";
    out += join_reals(rows[i]);
  }
  return out;
}

template <class T>
std::string join_ints(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(v[i]);
  }
  return out;
}

template <class E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<Command> kCommands[] = {{Command::rate_study, "rate-study"},
                                           {Command::w1_study, "w1-study"},
                                           {Command::price, "price"},
                                           {Command::lemma1, "lemma1"},
                                           {Command::check, "check"}};
constexpr EnumName<ProblemKind> kKinds[] = {{ProblemKind::synthetic_quadratic, "synthetic-quadratic"},
                                            {ProblemKind::is, "is"},
                                            {ProblemKind::nn, "nn"}};
constexpr EnumName<LawKind> kLaws[] = {{LawKind::standard_gaussian, "standard-gaussian"},
                                       {LawKind::uniform_cube, "uniform-cube"},
                                       {LawKind::discrete, "discrete"}};
constexpr EnumName<payoffs::Flavor> kFlavors[] = {{payoffs::Flavor::call, "call"}, {payoffs::Flavor::put, "put"}};
constexpr EnumName<optim::Method> kMethods[] = {{optim::Method::newton, "newton"},
                                                {optim::Method::gradient_descent, "gradient-descent"}};

template <class E, std::size_t N>
E parse_enum(const std::string& s, const EnumName<E> (&table)[N]) {
  std::string options;
  for (const auto& e : table) {
    if (s == e.name) return e.value;
    options += options.empty() ? "" : ", ";
    options += e.name;
  }
  throw ValueError{"expected one of {" + options + "}, got '" + s + "'"};
}

template <class E, std::size_t N>
std::string enum_name(E v, const EnumName<E> (&table)[N]) {
  for (const auto& e : table)
    if (e.value == v) return e.name;
  return "?";
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto add = [&](std::string s, std::string k, auto set, auto get) {
      f.push_back({std::move(s), std::move(k), set, get});
    };
    // [run]
    add("run", "command", [](RunConfig& c, const std::string& v) { c.command = parse_enum(v, kCommands); },
        [](const RunConfig& c) { return enum_name(c.command, kCommands); });
    add("run", "master_seed", [](RunConfig& c, const std::string& v) { c.master_seed = parse_u64(v); },
        [](const RunConfig& c) { return std::to_string(c.master_seed); });
    add("run", "replications", [](RunConfig& c, const std::string& v) { c.replications = parse_count(v, 1); },
        [](const RunConfig& c) { return std::to_string(c.replications); });
    add("run", "n_grid", [](RunConfig& c, const std::string& v) { c.n_grid = parse_n_grid(v); },
        [](const RunConfig& c) { return join_ints(c.n_grid); });
    add("run", "censor_limit",
        [](RunConfig& c, const std::string& v) {
          const double x = parse_nonnegative(v);
          if (x > 1.0) throw ValueError{"expected a fraction in [0, 1], got '" + v + "'"};
          c.censor_limit = x;
        },
        [](const RunConfig& c) { return format_real(c.censor_limit); });
    add("run", "csv", [](RunConfig& c, const std::string& v) { c.csv = v; }, [](const RunConfig& c) { return c.csv; });
    add("run", "json", [](RunConfig& c, const std::string& v) { c.json = v; }, [](const RunConfig& c) { return c.json; });
    // [problem]
    add("problem", "kind", [](RunConfig& c, const std::string& v) { c.problem.kind = parse_enum(v, kKinds); },
        [](const RunConfig& c) { return enum_name(c.problem.kind, kKinds); });
    // [synthetic]
    add("synthetic", "q",
        [](RunConfig& c, const std::string& v) { c.problem.synthetic.q = static_cast<int>(parse_count(v, 1)); },
        [](const RunConfig& c) { return std::to_string(c.problem.synthetic.q); });
    add("synthetic", "law", [](RunConfig& c, const std::string& v) { c.problem.synthetic.law = parse_enum(v, kLaws); },
        [](const RunConfig& c) { return enum_name(c.problem.synthetic.law, kLaws); });
    add("synthetic", "atoms", [](RunConfig& c, const std::string& v) { c.problem.synthetic.atoms = parse_rows(v); },
        [](const RunConfig& c) { return join_rows(c.problem.synthetic.atoms); });
    add("synthetic", "weights",
        [](RunConfig& c, const std::string& v) {
          c.problem.synthetic.weights = v.empty() ? std::vector<double>{} : parse_vector(v);
          for (double w : c.problem.synthetic.weights)
            if (w < 0.0) throw ValueError{"weights must be nonnegative"};
        },
        [](const RunConfig& c) { return join_reals(c.problem.synthetic.weights); });
    // [option]
    add("option", "flavor", [](RunConfig& c, const std::string& v) { c.problem.option.flavor = parse_enum(v, kFlavors); },
        [](const RunConfig& c) { return enum_name(c.problem.option.flavor, kFlavors); });
    add("option", "rate", [](RunConfig& c, const std::string& v) { c.problem.option.rate = parse_real(v); },
        [](const RunConfig& c) { return format_real(c.problem.option.rate); });
    add("option", "maturity", [](RunConfig& c, const std::string& v) { c.problem.option.maturity = parse_nonnegative(v); },
        [](const RunConfig& c) { return format_real(c.problem.option.maturity); });
    add("option", "strike", [](RunConfig& c, const std::string& v) { c.problem.option.strike = parse_nonnegative(v); },
        [](const RunConfig& c) { return format_real(c.problem.option.strike); });
    add("option", "sigma",
        [](RunConfig& c, const std::string& v) {
          c.problem.option.sigma = parse_rows(v);
          if (c.problem.option.sigma.empty()) throw ValueError{"sigma must not be empty"};
        },
        [](const RunConfig& c) { return join_rows(c.problem.option.sigma); });
    add("option", "spot", [](RunConfig& c, const std::string& v) { c.problem.option.spot = parse_vector(v); },
        [](const RunConfig& c) { return join_reals(c.problem.option.spot); });
    add("option", "basket_weights",
        [](RunConfig& c, const std::string& v) { c.problem.option.basket_weights = parse_vector(v); },
        [](const RunConfig& c) { return join_reals(c.problem.option.basket_weights); });
    // [network]
    add("network", "layers",
        [](RunConfig& c, const std::string& v) {
          std::vector<int> layers;
          for (const auto& p : split(v, ',')) layers.push_back(static_cast<int>(parse_count(p, 1)));
          if (layers.size() < 2) throw ValueError{"need at least two layer sizes (d_0, ..., d_K with K >= 1)"};
          c.problem.network.layers = layers;
        },
        [](const RunConfig& c) { return join_ints(c.problem.network.layers); });
    add("network", "ridge", [](RunConfig& c, const std::string& v) { c.problem.network.ridge = parse_positive(v); },
        [](const RunConfig& c) { return format_real(c.problem.network.ridge); });
    add("network", "dataset_size",
        [](RunConfig& c, const std::string& v) { c.problem.network.dataset_size = parse_count(v, 1); },
        [](const RunConfig& c) { return std::to_string(c.problem.network.dataset_size); });
    add("network", "dataset_seed", [](RunConfig& c, const std::string& v) { c.problem.network.dataset_seed = parse_u64(v); },
        [](const RunConfig& c) { return std::to_string(c.problem.network.dataset_seed); });
    add("network", "noise", [](RunConfig& c, const std::string& v) { c.problem.network.noise = parse_nonnegative(v); },
        [](const RunConfig& c) { return format_real(c.problem.network.noise); });
    // [optimizer]
    add("optimizer", "method", [](RunConfig& c, const std::string& v) { c.optimizer.method = parse_enum(v, kMethods); },
        [](const RunConfig& c) { return enum_name(c.optimizer.method, kMethods); });
    add("optimizer", "max_iters", [](RunConfig& c, const std::string& v) { c.optimizer.max_iters = parse_count(v, 1); },
        [](const RunConfig& c) { return std::to_string(c.optimizer.max_iters); });
    add("optimizer", "grad_tol", [](RunConfig& c, const std::string& v) { c.optimizer.grad_tol = parse_positive(v); },
        [](const RunConfig& c) { return format_real(c.optimizer.grad_tol); });
    add("optimizer", "armijo_c",
        [](RunConfig& c, const std::string& v) {
          const double x = parse_positive(v);
          if (x >= 1.0) throw ValueError{"expected a value in (0, 1), got '" + v + "'"};
          c.optimizer.armijo.c = x;
        },
        [](const RunConfig& c) { return format_real(c.optimizer.armijo.c); });
    add("optimizer", "armijo_shrink",
        [](RunConfig& c, const std::string& v) {
          const double x = parse_positive(v);
          if (x >= 1.0) throw ValueError{"expected a value in (0, 1), got '" + v + "'"};
          c.optimizer.armijo.shrink = x;
        },
        [](const RunConfig& c) { return format_real(c.optimizer.armijo.shrink); });
    add("optimizer", "initial_step",
        [](RunConfig& c, const std::string& v) { c.optimizer.armijo.initial_step = parse_positive(v); },
        [](const RunConfig& c) { return format_real(c.optimizer.armijo.initial_step); });
    add("optimizer", "multistart", [](RunConfig& c, const std::string& v) { c.optimizer.multistart = parse_count(v, 1); },
        [](const RunConfig& c) { return std::to_string(c.optimizer.multistart); });
    add("optimizer", "start_box_radius",
        [](RunConfig& c, const std::string& v) { c.optimizer.start_box_radius = parse_positive(v); },
        [](const RunConfig& c) { return format_real(c.optimizer.start_box_radius); });
    add("optimizer", "record_trace", [](RunConfig& c, const std::string& v) { c.optimizer.record_trace = parse_bool(v); },
        [](const RunConfig& c) { return std::string(c.optimizer.record_trace ? "true" : "false"); });
    // [price]
    add("price", "translations",
        [](RunConfig& c, const std::string& v) {
          std::vector<std::optional<std::vector<double>>> out;
          if (v.empty()) throw ValueError{"need at least one translation"};
          for (const auto& part : split(v, ';')) {
            if (part == "auto")
              out.emplace_back(std::nullopt);
            else
              out.emplace_back(parse_vector(part));
          }
          c.price.translations = std::move(out);
        },
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.price.translations.size(); ++i) {
            if (i) s += "; ";
            s += c.price.translations[i] ? join_reals(*c.price.translations[i]) : "auto";
          }
          return s;
        });
    add("price", "eval_n", [](RunConfig& c, const std::string& v) { c.price.eval_n = parse_count(v, 2); },
        [](const RunConfig& c) { return std::to_string(c.price.eval_n); });
    add("price", "train_n", [](RunConfig& c, const std::string& v) { c.price.train_n = parse_count(v, 1); },
        [](const RunConfig& c) { return std::to_string(c.price.train_n); });
    // [lemma1]
    add("lemma1", "n", [](RunConfig& c, const std::string& v) { c.lemma1.n = parse_count(v, 1); },
        [](const RunConfig& c) { return std::to_string(c.lemma1.n); });
    add("lemma1", "instances", [](RunConfig& c, const std::string& v) { c.lemma1.instances = parse_count(v, 1); },
        [](const RunConfig& c) { return std::to_string(c.lemma1.instances); });
    add("lemma1", "theta_grid", [](RunConfig& c, const std::string& v) { c.lemma1.theta_grid = parse_rows(v); },
        [](const RunConfig& c) { return join_rows(c.lemma1.theta_grid); });
    // [w1]
    add("w1", "q",
        [](RunConfig& c, const std::string& v) {
          const auto q = parse_count(v, 1);
          if (q > 3) throw ValueError{"expected 1, 2 or 3, got '" + v + "'"};
          c.w1.q = static_cast<int>(q);
        },
        [](const RunConfig& c) { return std::to_string(c.w1.q); });
    add("w1", "reference_factor", [](RunConfig& c, const std::string& v) { c.w1.reference_factor = parse_count(v, 1); },
        [](const RunConfig& c) { return std::to_string(c.w1.reference_factor); });
    add("w1", "cap", [](RunConfig& c, const std::string& v) { c.w1.cap = parse_count(v, 1); },
        [](const RunConfig& c) { return std::to_string(c.w1.cap); });
    return f;
  }();
  return table;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields())
    if (f.section == section && f.key == key) return &f;
  return nullptr;
}

bool known_section(const std::string& s) {
  for (const auto& f : fields())
    if (f.section == s) return true;
  return false;
}

void validate_semantics(const RunConfig& c, const std::map<std::string, std::size_t>& lines) {
  auto line_of = [&](const std::string& k) {
    auto it = lines.find(k);
    return it == lines.end() ? std::size_t{0} : it->second;
  };
  auto require = [&](const std::string& k) {
    if (!lines.count(k)) throw ConfigError(0, "command '" + to_string(c.command) + "' requires key '" + k + "'");
  };

  if (c.command == Command::rate_study || c.command == Command::w1_study) {
    require("run.n_grid");
    require("run.master_seed");
    if (c.n_grid.size() < 4) throw ConfigError(line_of("run.n_grid"), "n_grid: need at least 4 sample sizes");
    for (std::size_t k = 1; k < c.n_grid.size(); ++k)
      if (c.n_grid[k] <= c.n_grid[k - 1]) throw ConfigError(line_of("run.n_grid"), "n_grid: must be strictly increasing");
  }
  if (c.command == Command::price || c.command == Command::lemma1) require("run.master_seed");
  if (c.command == Command::price && c.problem.kind != ProblemKind::is)
    throw ConfigError(line_of("problem.kind"), "kind: the price command needs kind = is");

  const auto& o = c.problem.option;
  const std::size_t d = o.spot.size();
  if (o.basket_weights.size() != d)
    throw ConfigError(line_of("option.basket_weights"), "basket_weights: need one weight per spot price");
  if (o.sigma.size() != d) throw ConfigError(line_of("option.sigma"), "sigma: need " + std::to_string(d) + " rows");
  for (const auto& row : o.sigma)
    if (row.size() != d) throw ConfigError(line_of("option.sigma"), "sigma: rows must have " + std::to_string(d) + " entries");
  if (c.problem.kind == ProblemKind::is) {
    payoffs::BasketOptionSpec spec;
    spec.sigma = Matrix(static_cast<Index>(d), static_cast<Index>(d));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) spec.sigma(static_cast<Index>(i), static_cast<Index>(j)) = o.sigma[i][j];
    spec.s0 = Vector::Zero(static_cast<Index>(d));
    spec.a = Vector::Zero(static_cast<Index>(d));
    spec.T = o.maturity;
    spec.K = o.strike;
    try {
      payoffs::validate(spec);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(line_of("option.sigma"), std::string("sigma: ") + e.what());
    }
    for (const auto& t : c.price.translations)
      if (t && t->size() != d)
        throw ConfigError(line_of("price.translations"), "translations: vectors must have dimension " + std::to_string(d));
  }

  const auto& s = c.problem.synthetic;
  if (s.law == LawKind::discrete && c.problem.kind == ProblemKind::synthetic_quadratic) {
    if (s.atoms.empty()) throw ConfigError(line_of("synthetic.atoms"), "atoms: discrete law needs at least one atom");
    for (const auto& a : s.atoms)
      if (static_cast<int>(a.size()) != s.q)
        throw ConfigError(line_of("synthetic.atoms"), "atoms: every atom must have q = " + std::to_string(s.q) + " entries");
    if (!s.weights.empty()) {
      if (s.weights.size() != s.atoms.size())
        throw ConfigError(line_of("synthetic.weights"), "weights: need one weight per atom");
      double total = 0.0;
      for (double w : s.weights) total += w;
      if (std::abs(total - 1.0) > 1e-12) throw ConfigError(line_of("synthetic.weights"), "weights: must sum to 1");
    }
  }
  if (c.command == Command::lemma1) {
    const int dim = c.problem.kind == ProblemKind::is ? static_cast<int>(d)
                    : c.problem.kind == ProblemKind::synthetic_quadratic ? s.q
                                                                         : -1;
    for (const auto& x : c.lemma1.theta_grid)
      if (dim >= 0 && static_cast<int>(x.size()) != dim)
        throw ConfigError(line_of("lemma1.theta_grid"), "theta_grid: points must have dimension " + std::to_string(dim));
  }
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_string(Command c) { return enum_name(c, kCommands); }

std::string csv_name(const RunConfig& config) { return config.csv.empty() ? to_string(config.command) + ".csv" : config.csv; }
std::string json_name(const RunConfig& config) {
  return config.json.empty() ? to_string(config.command) + ".json" : config.json;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(lineno, "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (!known_section(section)) throw ConfigError(lineno, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(lineno, "key '" + key + "' appears before any [section]");
    const Field* f = find_field(section, key);
    if (!f) throw ConfigError(lineno, "unknown key '" + key + "' in [" + section + "]");
    const std::string full = section + "." + key;
    if (auto it = seen.find(full); it != seen.end())
      throw ConfigError(lineno, "duplicate key '" + key + "' (first set on line " + std::to_string(it->second) + ")");
    try {
      f->set(cfg, value);
    } catch (const ValueError& e) {
      throw ConfigError(lineno, key + ": " + e.what);
    }
    seen.emplace(full, lineno);
  }
  if (!seen.count("run.command")) throw ConfigError(0, "missing required key 'command' in [run]");
  validate_semantics(cfg, seen);
  return cfg;
}

std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> config_entries(
    const RunConfig& config) {
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> out;
  for (const auto& f : fields()) {
    if (out.empty() || out.back().first != f.section) out.push_back({f.section, {}});
    out.back().second.emplace_back(f.key, f.get(config));
  }
  return out;
}

std::string serialize(const RunConfig& config) {
  std::string out;
  for (const auto& [section, entries] : config_entries(config)) {
    if (!out.empty()) out += '\n';
    out += "[" + section + "]\n";
    for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  }
  return out;
}

}  // namespace empmin::cli
