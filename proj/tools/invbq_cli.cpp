// invbq: run the invariant-BQ benchmark grid, summarize results, print
// reference integrals.
//
// Exit codes: 0 success, 1 numerical failure (singular Gram, bad integrand
// value), 2 usage/config/format error, 3 reference quadrature failure.

#include <glob.h>

#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "invbq/errors.hpp"
#include "invbq/experiment.hpp"
#include "invbq/simd/dispatch.hpp"
#include "invbq/testbed.hpp"

namespace {

using namespace invbq;

std::vector<std::string> expand(const std::vector<std::string>& patterns) {
  std::vector<std::string> files;
  for (const auto& p : patterns) {
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) files.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    if (rc == GLOB_NOMATCH) throw ConfigError("no files match '" + p + "'");
    if (rc != 0 && rc != GLOB_NOMATCH) throw ConfigError("cannot expand '" + p + "'");
  }
  return files;
}

int cmd_run(const std::string& config_path, const std::string& output_override, unsigned threads,
            std::uint64_t seed_offset, bool quiet) {
  auto config = experiment::load_config(config_path);
  if (!output_override.empty()) config.output = output_override;
  experiment::RunOptions opts;
  opts.threads = threads;
  opts.seed_offset = seed_offset;
  opts.log = quiet ? nullptr : &std::cerr;
  const auto rows = experiment::run_experiment(config, opts);
  if (config.output.empty() || config.output == "-") {
    experiment::write_results(std::cout, rows);
  } else {
    std::ofstream out(config.output, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + config.output + "'");
    experiment::write_results(out, rows);
    if (!quiet) std::cerr << "wrote " << rows.size() << " rows to " << config.output << '\n';
  }
  return 0;
}

int cmd_summarize(const std::vector<std::string>& patterns, const std::string& output) {
  std::vector<experiment::ResultRow> rows;
  for (const auto& path : expand(patterns)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot read '" + path + "'");
    auto part = experiment::read_results(in, path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const auto summary = experiment::summarize(rows);
  if (output.empty() || output == "-") {
    experiment::write_summary(std::cout, summary);
  } else {
    std::ofstream out(output, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + output + "'");
    experiment::write_summary(out, summary);
  }
  return 0;
}

int cmd_oracle(const std::string& function, const std::string& measure_name, double rel_tol) {
  const auto desc = testbed::find(function);
  Measure measure = desc.default_domain;
  if (measure_name == "gaussian") {
    measure = Measure::gaussian(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(desc.dim)), 1.0);
  } else if (measure_name != "box") {
    throw ConfigError("measure must be 'box' or 'gaussian'");
  }
  quad::Options opt;
  opt.rel_tol = rel_tol;
  std::cout << experiment::format_double(testbed::reference_integral(desc, measure, opt)) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian quadrature with sign-flip invariant GP priors"};
  app.require_subcommand(1);

  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t seed_offset = 0;
  bool quiet = false;
  app.add_option("--threads", threads, "Worker threads for independent runs")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed-offset", seed_offset, "Added to every seed in the config");
  app.add_flag("-q,--quiet", quiet, "No progress output");

  auto* run = app.add_subcommand("run", "Run an experiment config and write a result CSV");
  std::string config_path, run_output;
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", run_output, "Overrides the config's output path ('-' = stdout)");

  auto* summarize = app.add_subcommand("summarize", "Aggregate result CSVs across seeds");
  std::vector<std::string> patterns;
  std::string summary_output;
  summarize->add_option("files", patterns, "Result files or glob patterns")->required();
  summarize->add_option("-o,--output", summary_output, "Summary CSV ('-' = stdout)");

  auto* oracle = app.add_subcommand("oracle", "Print the reference integral of a test function");
  std::string function, measure_name = "box";
  double rel_tol = 1e-10;
  oracle->add_option("function", function, "Test function name")->required();
  oracle->add_option("measure", measure_name, "box (default [-3,3]^d) or gaussian (mean 1, var 1)");
  oracle->add_option("--rel-tol", rel_tol, "Relative quadrature tolerance");

  app.add_subcommand("isa", "Print the SIMD variant in use");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run) return cmd_run(config_path, run_output, threads, seed_offset, quiet);
    if (*summarize) return cmd_summarize(patterns, summary_output);
    if (*oracle) return cmd_oracle(function, measure_name, rel_tol);
    std::cout << simd::isa_name(simd::active_isa()) << '\n';
    return 0;
  } catch (const OracleFailure& e) {
    std::cerr << "oracle failure: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
