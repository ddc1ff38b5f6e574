#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "invbq/bq.hpp"
#include "invbq/testbed.hpp"

namespace invbq::experiment {

/// Methods understood by run_experiment.
///   standard         trivial group (plain BQ)
///   invariant-point  {I, -I}
///   invariant-all    closure of the test function's declared generators
///   mc               Monte Carlo on the initial-design stream
std::vector<std::string> method_names();

/// Parsed experiment config.
///
/// File grammar: one `key = value` per line, where value is a JSON literal
/// (string, number, bool, array or object). `#` starts a comment outside
/// strings; blank lines are ignored. Keys:
///   function        test function name (required)
///   params          object of test-function parameter overrides
///   measure         "box" (default) or "gaussian"
///   lower, upper    box bounds (default: the function's [-3, 3]^d)
///   mean, variance  Gaussian measure (default: ones, 1)
///   methods         array of method names (required)
///   n_initial       default 5
///   n_total         default 25
///   seeds           array of distinct non-negative integers (required)
///   hyper           "mll" (default), "fixed" or "optimal"
///   theta2, lengthscale   hyperparameters for hyper = "fixed"
///   oversample      points used to find "optimal" hyperparameters (default 150)
///   grid            [lengthscale_points, variance_points] (default [25, 25])
///   lengthscale_range   [lo, hi] multiples of the domain diagonal spanned by
///                   the lengthscale grid (default [0.1, 10])
///   refine_steps    hyperparameter refinement sweeps (default 20)
///   n_candidates    acquisition candidates (default 500)
///   output          CSV path
///   generators      optional override of the invariant-all generators,
///                   e.g. [[-1, -1]]
struct Config {
  std::string function;
  std::map<std::string, double> params;
  std::string measure = "box";
  std::optional<Eigen::VectorXd> lower;
  std::optional<Eigen::VectorXd> upper;
  std::optional<Eigen::VectorXd> mean;
  double variance = 1.0;
  std::vector<std::string> methods;
  std::size_t n_initial = 5;
  std::size_t n_total = 25;
  std::vector<std::uint64_t> seeds;
  std::string hyper = "mll";
  RbfParams fixed;
  std::size_t oversample = 150;
  std::size_t lengthscale_points = 25;
  double lengthscale_lo = 0.1;
  double lengthscale_hi = 10.0;
  std::size_t variance_points = 25;
  std::size_t refine_steps = 20;
  std::size_t n_candidates = 500;
  std::string output;
  std::optional<std::vector<SignVector>> generators;

  /// Key/value pairs exactly as read, for re-serialization.
  nlohmann::json raw = nlohmann::json::object();

  testbed::TestFunctionDescriptor descriptor() const;
  Measure build_measure() const;
  SignFlipGroup group_for(const std::string& method) const;
  SearchConfig search() const;
};

/// Throws ConfigError with the line number on malformed input or invalid values.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);
/// One `key = json` line per key present in the parsed input.
std::string serialize_config(const Config& config);

/// Exact header of result files.
inline constexpr const char* kResultHeader =
    "function,method,measure,seed,N,mu_Z,sigma_Z,reference,rel_abs_err,wall_ms";

struct ResultRow {
  std::string function;
  std::string method;
  std::string measure;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double mu_z = 0.0;
  double sigma_z = 0.0;
  double reference = 0.0;
  double rel_abs_err = 0.0;
  double wall_ms = 0.0;
};

struct RunOptions {
  unsigned threads = 1;
  std::uint64_t seed_offset = 0;
  /// Progress lines go here when set.
  std::ostream* log = nullptr;
};

/// MLL hyperparameters fitted to `oversample` evaluations of f: the
/// "optimal" setting used for the fixed-hyperparameter experiments.
RbfParams oversampled_hyperparameters(const Integrand& f, const Measure& measure,
                                      const SignFlipGroup& group, const SearchConfig& search,
                                      std::size_t oversample, std::uint64_t seed = 0x5eed);

/// Runs every (method, seed) cell. All methods see the same initial design
/// for a given seed. Rows are ordered by method (config order), seed, N.
std::vector<ResultRow> run_experiment(const Config& config, const RunOptions& options = {});

/// Same as run_experiment, with the reference integral supplied.
std::vector<ResultRow> run_experiment(const Config& config, double reference,
                                      const RunOptions& options = {});

void write_results(std::ostream& out, const std::vector<ResultRow>& rows);
/// Throws FormatError on a header or field mismatch.
std::vector<ResultRow> read_results(std::istream& in, const std::string& source = "<stream>");

/// Exact header of summary files.
inline constexpr const char* kSummaryHeader =
    "function,method,measure,N,n_seeds,mean_rel_abs_err,std_rel_abs_err,mean_sigma_Z,std_sigma_Z";

struct SummaryRow {
  std::string function;
  std::string method;
  std::string measure;
  std::size_t n = 0;
  std::size_t n_seeds = 0;
  double mean_rel_abs_err = 0.0;
  double std_rel_abs_err = 0.0;
  double mean_sigma_z = 0.0;
  double std_sigma_z = 0.0;
};

/// Mean and population standard deviation across seeds per
/// (function, method, measure, N). Independent of row order. Throws
/// FormatError on duplicate (function, method, measure, seed, N) rows.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Shortest round-trip formatting with 17 significant digits.
std::string format_double(double v);

}  // namespace invbq::experiment
