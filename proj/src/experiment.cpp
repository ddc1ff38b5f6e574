#include "invbq/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "invbq/errors.hpp"

namespace invbq::experiment {

using nlohmann::json;

std::vector<std::string> method_names() {
  return {"standard", "invariant-point", "invariant-all", "mc"};
}

// ---------------------------------------------------------------------------
// Config

namespace {

// Strips a trailing comment, ignoring '#' inside JSON strings.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_string) {
      if (ch == '\\') {
        ++i;
      } else if (ch == '"') {
        in_string = false;
      }
    } else if (ch == '"') {
      in_string = true;
    } else if (ch == '#') {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Eigen::VectorXd to_vector(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) throw ConfigError("'" + key + "' must be a non-empty array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("'" + key + "' must contain numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

std::size_t to_count(const json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError("'" + key + "' must be a non-negative integer");
  }
  return j.get<std::size_t>();
}

double to_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
  return j.get<double>();
}

std::string to_string_value(const json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError("'" + key + "' must be a string");
  return j.get<std::string>();
}

void apply_key(Config& c, const std::string& key, const json& v) {
  if (key == "function") {
    c.function = to_string_value(v, key);
  } else if (key == "params") {
    if (!v.is_object()) throw ConfigError("'params' must be an object");
    for (const auto& [k, x] : v.items()) c.params[k] = to_number(x, "params." + k);
  } else if (key == "measure") {
    c.measure = to_string_value(v, key);
  } else if (key == "lower") {
    c.lower = to_vector(v, key);
  } else if (key == "upper") {
    c.upper = to_vector(v, key);
  } else if (key == "mean") {
    c.mean = to_vector(v, key);
  } else if (key == "variance") {
    c.variance = to_number(v, key);
  } else if (key == "methods") {
    if (!v.is_array() || v.empty()) throw ConfigError("'methods' must be a non-empty array");
    c.methods.clear();
    for (const auto& m : v) c.methods.push_back(to_string_value(m, key));
  } else if (key == "n_initial") {
    c.n_initial = to_count(v, key);
  } else if (key == "n_total") {
    c.n_total = to_count(v, key);
  } else if (key == "seeds") {
    if (!v.is_array() || v.empty()) throw ConfigError("'seeds' must be a non-empty array");
    c.seeds.clear();
    for (const auto& s : v) c.seeds.push_back(to_count(s, key));
  } else if (key == "hyper") {
    c.hyper = to_string_value(v, key);
  } else if (key == "theta2") {
    c.fixed.variance = to_number(v, key);
  } else if (key == "lengthscale") {
    c.fixed.lengthscale = to_number(v, key);
  } else if (key == "oversample") {
    c.oversample = to_count(v, key);
  } else if (key == "grid") {
    if (!v.is_array() || v.size() != 2) throw ConfigError("'grid' must be [n_lengthscale, n_variance]");
    c.lengthscale_points = to_count(v[0], key);
    c.variance_points = to_count(v[1], key);
  } else if (key == "lengthscale_range") {
    const auto r = to_vector(v, key);
    if (r.size() != 2 || !(r[0] > 0.0) || !(r[0] < r[1])) {
      throw ConfigError("'lengthscale_range' must be [lo, hi] with 0 < lo < hi");
    }
    c.lengthscale_lo = r[0];
    c.lengthscale_hi = r[1];
  } else if (key == "refine_steps") {
    c.refine_steps = to_count(v, key);
  } else if (key == "n_candidates") {
    c.n_candidates = to_count(v, key);
  } else if (key == "output") {
    c.output = to_string_value(v, key);
  } else if (key == "generators") {
    if (!v.is_array()) throw ConfigError("'generators' must be an array of sign vectors");
    std::vector<SignVector> gens;
    for (const auto& g : v) {
      if (!g.is_array()) throw ConfigError("'generators' must be an array of sign vectors");
      std::vector<int> signs;
      for (const auto& s : g) {
        if (!s.is_number_integer()) throw ConfigError("sign vector entries must be -1 or 1");
        signs.push_back(s.get<int>());
      }
      try {
        gens.emplace_back(std::move(signs));
      } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
      }
    }
    c.generators = std::move(gens);
  } else {
    throw ConfigError("unknown key '" + key + "'");
  }
}

void validate(const Config& c) {
  if (c.function.empty()) throw ConfigError("missing required key 'function'");
  if (c.methods.empty()) throw ConfigError("missing required key 'methods'");
  if (c.seeds.empty()) throw ConfigError("missing required key 'seeds'");
  const auto known = method_names();
  for (const auto& m : c.methods) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw ConfigError("unknown method '" + m + "'");
    }
  }
  if (std::set<std::string>(c.methods.begin(), c.methods.end()).size() != c.methods.size()) {
    throw ConfigError("'methods' contains duplicates");
  }
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    throw ConfigError("'seeds' must be distinct");
  }
  if (c.n_initial < 1) throw ConfigError("'n_initial' must be >= 1");
  if (c.n_total < c.n_initial) throw ConfigError("'n_total' must be >= 'n_initial'");
  if (c.measure != "box" && c.measure != "gaussian") {
    throw ConfigError("'measure' must be \"box\" or \"gaussian\"");
  }
  if (c.measure == "gaussian" && (c.lower || c.upper)) {
    throw ConfigError("a Gaussian measure is defined on R^d; 'lower'/'upper' do not apply");
  }
  if (c.measure == "box" && (c.mean || c.raw.contains("variance"))) {
    throw ConfigError("'mean'/'variance' only apply to a Gaussian measure");
  }
  if (c.hyper != "mll" && c.hyper != "fixed" && c.hyper != "optimal") {
    throw ConfigError("'hyper' must be \"mll\", \"fixed\" or \"optimal\"");
  }
  if (c.hyper == "fixed" && !(c.raw.contains("theta2") && c.raw.contains("lengthscale"))) {
    throw ConfigError("hyper = \"fixed\" needs 'theta2' and 'lengthscale'");
  }
  if (c.hyper == "fixed") {
    try {
      c.fixed.validate();
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  }
  if (c.n_candidates < 1) throw ConfigError("'n_candidates' must be >= 1");
  if (c.hyper == "optimal" && c.oversample < 2) throw ConfigError("'oversample' must be >= 2");
  // Resolves the function and measure, surfacing their errors now.
  const auto desc = c.descriptor();
  const auto measure = c.build_measure();
  if (measure.dim() != desc.dim) {
    throw ConfigError("measure dimension does not match function '" + c.function + "'");
  }
  if (c.generators) {
    for (const auto& g : *c.generators) {
      if (g.dim() != desc.dim) throw ConfigError("generator dimension does not match the function");
    }
  }
}

}  // namespace

testbed::TestFunctionDescriptor Config::descriptor() const {
  auto desc = testbed::find(function, params);
  if (generators) desc.generators = *generators;
  return desc;
}

Measure Config::build_measure() const {
  const auto desc = testbed::find(function, params);
  try {
    if (measure == "gaussian") {
      return Measure::gaussian(
          mean.value_or(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(desc.dim))), variance);
    }
    const auto& box = desc.default_domain.as_box();
    return Measure::box(lower.value_or(box.lower), upper.value_or(box.upper));
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

SignFlipGroup Config::group_for(const std::string& method) const {
  const auto desc = descriptor();
  if (method == "invariant-point") return SignFlipGroup::point_symmetry(desc.dim);
  if (method == "invariant-all") return desc.declared_group();
  return SignFlipGroup::trivial(desc.dim);
}

SearchConfig Config::search() const {
  SearchConfig s;
  s.lengthscale_points = lengthscale_points;
  s.lengthscale_lo = lengthscale_lo;
  s.lengthscale_hi = lengthscale_hi;
  s.variance_points = variance_points;
  s.refine_steps = refine_steps;
  if (hyper == "fixed") {
    s.mode = SearchConfig::Mode::fixed;
    s.fixed = fixed;
  }
  return s;
}

Config parse_config(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (c.raw.contains(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    json v;
    try {
      v = json::parse(value);
    } catch (const json::parse_error&) {
      throw ConfigError("line " + std::to_string(line_no) + ": value of '" + key +
                        "' is not a valid literal: " + value);
    }
    try {
      apply_key(c, key, v);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
    c.raw[key] = v;
  }
  validate(c);
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const Config& config) {
  std::string out;
  for (const auto& [key, value] : config.raw.items()) {
    out += key + " = " + value.dump() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Running

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RbfParams oversampled_hyperparameters(const Integrand& f, const Measure& measure,
                                      const SignFlipGroup& group, const SearchConfig& search,
                                      std::size_t oversample, std::uint64_t seed) {
  const Eigen::MatrixXd X = initial_design(measure, oversample, seed);
  Eigen::VectorXd Y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) Y[i] = f.evaluate(X.row(i).transpose());
  SearchConfig s = search;
  s.mode = SearchConfig::Mode::mll;
  s.domain_diagonal = measure.diagonal();
  return optimize_hyperparameters(Dataset(X, Y), group, s);
}

namespace {

struct Cell {
  std::size_t method_index;
  std::uint64_t seed;
};

std::vector<ResultRow> run_cell(const Config& config, const Measure& measure,
                                const Integrand& f, double reference, const std::string& method,
                                std::uint64_t seed, const SearchConfig& search) {
  std::vector<ResultRow> rows;
  auto make_row = [&](std::size_t n, double mu, double sigma, double wall) {
    return ResultRow{config.function, method,    measure.label(),
                     seed,            n,         mu,
                     sigma,           reference, std::abs(mu - reference) / std::abs(reference),
                     wall};
  };
  if (method == "mc") {
    const auto start = std::chrono::steady_clock::now();
    const auto trace = mc_trace(f, measure, config.n_initial, config.n_total, seed);
    const double wall =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (const auto& e : trace) rows.push_back(make_row(e.n, e.estimate, e.stderr_, wall));
    return rows;
  }
  ActiveConfig active;
  active.n_initial = config.n_initial;
  active.n_total = config.n_total;
  active.seed = seed;
  active.group = config.group_for(method);
  active.hyper = search;
  active.n_candidates = config.n_candidates;
  const BqState state = run_active_bq(f, measure, active);
  for (const auto& h : state.history()) {
    rows.push_back(make_row(h.n, h.mean, std::sqrt(h.variance), h.wall_ms));
  }
  return rows;
}

}  // namespace

std::vector<ResultRow> run_experiment(const Config& config, const RunOptions& options) {
  const auto desc = config.descriptor();
  const double reference = testbed::reference_integral(desc, config.build_measure());
  if (options.log) {
    *options.log << "reference integral of " << config.function << " = "
                 << format_double(reference) << '\n';
  }
  return run_experiment(config, reference, options);
}

std::vector<ResultRow> run_experiment(const Config& config, double reference,
                                      const RunOptions& options) {
  const auto desc = config.descriptor();
  const Measure measure = config.build_measure();
  const Integrand f = testbed::make_integrand(desc);

  // Hyperparameter policy per method; "optimal" is resolved once up front.
  std::vector<SearchConfig> searches;
  for (const auto& method : config.methods) {
    SearchConfig s = config.search();
    if (config.hyper == "optimal" && method != "mc") {
      s.mode = SearchConfig::Mode::fixed;
      s.fixed = oversampled_hyperparameters(f, measure, config.group_for(method), config.search(),
                                            config.oversample);
      if (options.log) {
        *options.log << "optimal hyperparameters for " << method << ": theta2 = "
                     << format_double(s.fixed.variance)
                     << ", lengthscale = " << format_double(s.fixed.lengthscale) << '\n';
      }
    }
    searches.push_back(s);
  }

  std::vector<std::uint64_t> seeds;
  for (auto s : config.seeds) seeds.push_back(s + options.seed_offset);
  std::sort(seeds.begin(), seeds.end());

  std::vector<Cell> cells;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    for (auto seed : seeds) cells.push_back({m, seed});
  }
  std::vector<std::vector<ResultRow>> results(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& cell = cells[i];
      const auto& method = config.methods[cell.method_index];
      try {
        results[i] = run_cell(config, measure, f, reference, method, cell.seed,
                              searches[cell.method_index]);
        if (options.log) {
          std::lock_guard lock(log_mutex);
          const auto& last = results[i].back();
          *options.log << config.function << " " << method << " seed " << cell.seed
                       << ": N=" << last.n << " rel_abs_err=" << format_double(last.rel_abs_err)
                       << '\n';
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(cells.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<ResultRow> rows;
  for (auto& r : results) rows.insert(rows.end(), r.begin(), r.end());
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

void write_results(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kResultHeader << '\n';
  for (const auto& r : rows) {
    out << r.function << ',' << r.method << ',' << r.measure << ',' << r.seed << ',' << r.n << ','
        << format_double(r.mu_z) << ',' << format_double(r.sigma_z) << ','
        << format_double(r.reference) << ',' << format_double(r.rel_abs_err) << ','
        << format_double(r.wall_ms) << '\n';
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

template <typename T>
T parse_field(const std::string& s, const std::string& where) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(where + ": cannot parse '" + s + "'");
  }
  return value;
}

}  // namespace

std::vector<ResultRow> read_results(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultHeader) {
    throw FormatError(source + ": unexpected header '" + line + "', expected '" + kResultHeader +
                      "'");
  }
  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (f.size() != 10) {
      throw FormatError(where + ": expected 10 fields, got " + std::to_string(f.size()));
    }
    ResultRow r;
    r.function = f[0];
    r.method = f[1];
    r.measure = f[2];
    r.seed = parse_field<std::uint64_t>(f[3], where);
    r.n = parse_field<std::size_t>(f[4], where);
    r.mu_z = parse_field<double>(f[5], where);
    r.sigma_z = parse_field<double>(f[6], where);
    r.reference = parse_field<double>(f[7], where);
    r.rel_abs_err = parse_field<double>(f[8], where);
    r.wall_ms = parse_field<double>(f[9], where);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  using Key = std::tuple<std::string, std::string, std::string, std::size_t>;
  // Values keyed by seed so the reduction order does not depend on input order.
  std::map<Key, std::map<std::uint64_t, std::pair<double, double>>> groups;
  for (const auto& r : rows) {
    auto& by_seed = groups[Key{r.function, r.method, r.measure, r.n}];
    if (!by_seed.emplace(r.seed, std::pair{r.rel_abs_err, r.sigma_z}).second) {
      throw FormatError("duplicate row for " + r.function + "/" + r.method + "/" + r.measure +
                        " seed " + std::to_string(r.seed) + " N " + std::to_string(r.n));
    }
  }
  std::vector<SummaryRow> out;
  for (const auto& [key, by_seed] : groups) {
    const double n = static_cast<double>(by_seed.size());
    double sum_e = 0.0, sum_s = 0.0;
    for (const auto& [seed, v] : by_seed) {
      sum_e += v.first;
      sum_s += v.second;
    }
    const double mean_e = sum_e / n;
    const double mean_s = sum_s / n;
    double ss_e = 0.0, ss_s = 0.0;
    for (const auto& [seed, v] : by_seed) {
      ss_e += (v.first - mean_e) * (v.first - mean_e);
      ss_s += (v.second - mean_s) * (v.second - mean_s);
    }
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::get<3>(key),
                   by_seed.size(), mean_e, std::sqrt(ss_e / n), mean_s, std::sqrt(ss_s / n)});
  }
  return out;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rows) {
    out << r.function << ',' << r.method << ',' << r.measure << ',' << r.n << ',' << r.n_seeds
        << ',' << format_double(r.mean_rel_abs_err) << ',' << format_double(r.std_rel_abs_err)
        << ',' << format_double(r.mean_sigma_z) << ',' << format_double(r.std_sigma_z) << '\n';
  }
}

}  // namespace invbq::experiment
