#include "empmin/parallel.hpp"
#include "empmin/runner.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  using namespace empmin::cli;

  CLI::App app{"Empirical minimization experiments: rate studies, W1 studies, pricing and self-checks."};
  std::string config_path;
  std::size_t jobs = empmin::hardware_jobs();
  std::string out_dir = ".";
  app.add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("-j,--jobs", jobs, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", out_dir, "directory for the CSV and JSON artifacts")->check(CLI::ExistingDirectory);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config_error;
  }

  RunOptions opts;
  opts.jobs = jobs;
  opts.out_dir = out_dir;
  opts.log = &std::cerr;
  if (const char* env = std::getenv("EMPMIN_SEED"); env && *env) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (*end != '\0' || std::string(env).find('-') != std::string::npos) {
      std::cerr << "empmin: EMPMIN_SEED must be a nonnegative integer, got '" << env << "'\n";
      return exit_config_error;
    }
    opts.seed_override = v;
  }

  std::ifstream in(config_path);
  std::stringstream text;
  text << in.rdbuf();
  RunConfig config;
  try {
    config = parse_config(text.str());
  } catch (const ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return exit_config_error;
  }
  return run(config, opts);
}
