#include "invbq/bq.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numeric>
#include <sstream>

#include "invbq/errors.hpp"

namespace invbq {

namespace {

std::mutex& warning_mutex() {
  static std::mutex m;
  return m;
}

std::function<void(std::string_view)>& warning_handler() {
  static std::function<void(std::string_view)> handler = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return handler;
}

void warn(const std::string& msg) {
  std::lock_guard lock(warning_mutex());
  if (warning_handler()) warning_handler()(msg);
}

// Clamp at zero, complaining when the raw value is meaningfully negative.
double clamp_variance(double raw, double prior, const char* what) {
  if (raw < -1e-8 * std::abs(prior)) {
    std::ostringstream msg;
    msg << what << " variance " << raw << " is negative beyond round-off (prior " << prior
        << "); the Gram matrix is badly conditioned";
    warn(msg.str());
  }
  return std::max(raw, 0.0);
}

std::string format_point(const Eigen::VectorXd& x) {
  std::ostringstream out;
  out.precision(17);
  out << '(';
  for (Eigen::Index q = 0; q < x.size(); ++q) out << (q ? ", " : "") << x[q];
  out << ')';
  return out.str();
}

}  // namespace

void set_warning_handler(std::function<void(std::string_view)> handler) {
  std::lock_guard lock(warning_mutex());
  warning_handler() = std::move(handler);
}

IntegralPosterior bq_posterior(const GpPosterior& gp, const EmbeddingTable& table) {
  if (!(gp.spec().params == table.params()) || !(gp.spec().group == table.group())) {
    throw ConfigError("bq_posterior: GP kernel and embedding table disagree");
  }
  const double prior = table.prior_variance_sum();
  if (gp.size() == 0) return {0.0, prior};
  const Eigen::VectorXd qbar = table.kernel_mean_sum(gp.data().X);
  const double mean = qbar.dot(gp.weights());
  const double raw = prior - gp.half_solve(qbar).squaredNorm();
  return {mean, clamp_variance(raw, prior, "integral")};
}

BqState::BqState(GpPosterior gp, EmbeddingTable table)
    : gp_(std::move(gp)), table_(std::move(table)) {
  integral_ = bq_posterior(gp_, table_);
  if (gp_.size() > 0) {
    qbar_half_ = gp_.half_solve(table_.kernel_mean_sum(gp_.data().X));
  }
}

void BqState::set_history(std::vector<HistoryEntry> history) { history_ = std::move(history); }

double acquisition_ivr(const Eigen::VectorXd& x, const BqState& state) {
  if (!state.measure().contains(x)) {
    throw InvalidInput("acquisition: candidate " + format_point(x) +
                       " lies outside the integration domain");
  }
  const auto& gp = state.gp();
  const double qbar_x = state.table().kernel_mean_sum(x);
  const double kxx = kernel_diag(gp.spec(), x);
  if (gp.size() == 0) {
    return kxx > 0.0 ? qbar_x * qbar_x / kxx : 0.0;
  }
  const Eigen::VectorXd v = gp.half_solve(kernel_row(gp.spec(), gp.data().X, x));
  const double cov = qbar_x - state.qbar_half().dot(v);
  const double var = kxx - v.squaredNorm() + gp.jitter_used();
  if (!(var > 0.0)) return 0.0;
  return cov * cov / var;
}

Eigen::VectorXd sample_measure(const Measure& measure, std::mt19937_64& rng) {
  const auto d = static_cast<Eigen::Index>(measure.dim());
  Eigen::VectorXd x(d);
  if (measure.is_box()) {
    const auto& box = measure.as_box();
    for (Eigen::Index q = 0; q < d; ++q) {
      x[q] = std::uniform_real_distribution<double>(box.lower[q], box.upper[q])(rng);
    }
  } else {
    const auto& g = measure.as_gaussian();
    std::normal_distribution<double> normal(0.0, std::sqrt(g.variance));
    for (Eigen::Index q = 0; q < d; ++q) x[q] = g.mean[q] + normal(rng);
  }
  return x;
}

Eigen::MatrixXd initial_design(const Measure& measure, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(measure.dim()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) X.row(i) = sample_measure(measure, rng).transpose();
  return X;
}

namespace {

// True if x coincides (max-norm 1e-9) with an observed point or an orbit
// image of one.
bool is_duplicate(const Eigen::VectorXd& x, const BqState& state) {
  const auto& X = state.gp().data().X;
  const auto& group = state.gp().spec().group;
  for (Eigen::Index n = 0; n < X.rows(); ++n) {
    const Eigen::VectorXd xn = X.row(n).transpose();
    for (const auto& g : group.elements()) {
      if ((apply(g, xn) - x).cwiseAbs().maxCoeff() <= 1e-9) return true;
    }
  }
  return false;
}

// Golden-section maximization of t -> f(t) on [a, b].
template <typename F>
std::pair<double, double> golden_max(F&& f, double a, double b, int iterations) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < iterations; ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

}  // namespace

Eigen::VectorXd select_next(const BqState& state, std::uint64_t seed, std::size_t n_candidates,
                            std::size_t refine_steps) {
  if (n_candidates == 0) throw InvalidInput("select_next: need at least one candidate");
  const Measure& measure = state.measure();
  const BoxLebesgue box = measure.search_box();
  const auto d = static_cast<Eigen::Index>(measure.dim());

  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> candidates;
  std::vector<double> scores;
  candidates.reserve(n_candidates);
  scores.reserve(n_candidates);
  for (std::size_t i = 0; i < n_candidates; ++i) {
    Eigen::VectorXd x(d);
    for (Eigen::Index q = 0; q < d; ++q) {
      x[q] = std::uniform_real_distribution<double>(box.lower[q], box.upper[q])(rng);
    }
    scores.push_back(acquisition_ivr(x, state));
    candidates.push_back(std::move(x));
  }
  std::vector<std::size_t> order(n_candidates);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  Eigen::VectorXd best = candidates[order.front()];
  double best_score = scores[order.front()];
  Eigen::VectorXd width = box.upper - box.lower;
  double h = 0.1;
  for (std::size_t step = 0; step < refine_steps; ++step) {
    for (Eigen::Index q = 0; q < d; ++q) {
      const double lo = std::max(box.lower[q], best[q] - h * width[q]);
      const double hi = std::min(box.upper[q], best[q] + h * width[q]);
      if (!(lo < hi)) continue;
      Eigen::VectorXd probe = best;
      auto along = [&](double t) {
        probe[q] = t;
        return acquisition_ivr(probe, state);
      };
      const auto [t, value] = golden_max(along, lo, hi, 12);
      if (value > best_score) {
        best[q] = t;
        best_score = value;
      }
    }
    h *= 0.5;
  }
  if (!is_duplicate(best, state)) return best;
  for (std::size_t idx : order) {
    if (!is_duplicate(candidates[idx], state)) return candidates[idx];
  }
  return best;
}

BqState run_active_bq(const Integrand& f, const Measure& measure, const ActiveConfig& config) {
  if (config.n_initial < 1) throw InvalidInput("run_active_bq: n_initial must be >= 1");
  if (config.n_total < config.n_initial) {
    throw InvalidInput("run_active_bq: n_total must be >= n_initial");
  }
  if (f.dim != measure.dim() || config.group.dim() != measure.dim()) {
    throw InvalidInput("run_active_bq: integrand, group and measure dimensions differ");
  }
  const auto start = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  };
  auto evaluate = [&](const Eigen::VectorXd& x) {
    const double y = f.evaluate(x);
    if (!std::isfinite(y)) {
      throw IntegrandError("integrand returned " + std::to_string(y) + " at " + format_point(x));
    }
    return y;
  };

  Dataset data;
  const Eigen::MatrixXd X0 = initial_design(measure, config.n_initial, config.seed);
  for (Eigen::Index i = 0; i < X0.rows(); ++i) {
    const Eigen::VectorXd x = X0.row(i).transpose();
    data.append(x, evaluate(x));
  }

  SearchConfig search = config.hyper;
  search.domain_diagonal = measure.diagonal();
  std::optional<EmbeddingTable> table;
  std::vector<HistoryEntry> history;
  while (true) {
    const RbfParams params = optimize_hyperparameters(data, config.group, search);
    if (!table || !(table->params() == params)) {
      table.emplace(build_embedding_table(measure, params, config.group));
    }
    BqState state(GpPosterior::fit(KernelSpec{params, config.group}, data), *table);
    history.push_back({data.size(), state.integral().mean, state.integral().variance, 0.0});
    history.back().wall_ms = elapsed_ms();
    if (data.size() >= config.n_total) {
      state.set_history(std::move(history));
      return state;
    }
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(data.size())};
    std::uint64_t step_seed = 0;
    {
      std::array<std::uint32_t, 2> words{};
      seq.generate(words.begin(), words.end());
      step_seed = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
    }
    const Eigen::VectorXd x = select_next(state, step_seed, config.n_candidates,
                                          config.refine_steps);
    data.append(x, evaluate(x));
  }
}

namespace {

struct Welford {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double v) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

}  // namespace

std::vector<McEstimate> mc_trace(const Integrand& f, const Measure& measure, std::size_t n_min,
                                 std::size_t n_max, std::uint64_t seed) {
  if (n_min < 1 || n_max < n_min) throw InvalidInput("mc_trace: need 1 <= n_min <= n_max");
  if (f.dim != measure.dim()) throw InvalidInput("mc_trace: dimension mismatch");
  std::mt19937_64 rng(seed);
  const double mass = measure.mass();
  Welford acc;
  std::vector<McEstimate> out;
  out.reserve(n_max - n_min + 1);
  for (std::size_t i = 1; i <= n_max; ++i) {
    const Eigen::VectorXd x = sample_measure(measure, rng);
    const double y = f.evaluate(x);
    if (!std::isfinite(y)) {
      throw IntegrandError("integrand returned " + std::to_string(y) + " at " + format_point(x));
    }
    acc.add(y);
    if (i >= n_min) {
      out.push_back({i, mass * acc.mean,
                     mass * std::sqrt(acc.variance() / static_cast<double>(i))});
    }
  }
  return out;
}

McEstimate mc_estimate(const Integrand& f, const Measure& measure, std::size_t n,
                       std::uint64_t seed) {
  if (n < 2) throw InvalidInput("mc_estimate: need n >= 2");
  return mc_trace(f, measure, n, n, seed).back();
}

}  // namespace invbq
