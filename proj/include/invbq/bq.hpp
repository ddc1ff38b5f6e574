#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "invbq/embeddings.hpp"
#include "invbq/gp.hpp"
#include "invbq/integrand.hpp"
#include "invbq/measure.hpp"

namespace invbq {

/// Gaussian posterior over Z = int f dpi.
struct IntegralPosterior {
  double mean = 0.0;
  double variance = 0.0;
};

/// mu_Z = qbar^T G^{-1} Y and sigma^2_Z = sum qKq_ij - qbar^T G^{-1} qbar,
/// with qbar_n = sum_{i,j} qK_ij(x_n). The trivial group gives standard BQ.
/// Throws ConfigError if gp and table were built from different kernels.
IntegralPosterior bq_posterior(const GpPosterior& gp, const EmbeddingTable& table);

/// Receives diagnostics such as clamped negative variances. The default
/// handler writes to stderr; pass nullptr to silence.
void set_warning_handler(std::function<void(std::string_view)> handler);

struct HistoryEntry {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double wall_ms = 0.0;
};

/// A conditioned GP plus the embeddings for its kernel.
class BqState {
 public:
  BqState(GpPosterior gp, EmbeddingTable table);

  const GpPosterior& gp() const noexcept { return gp_; }
  const EmbeddingTable& table() const noexcept { return table_; }
  const Measure& measure() const noexcept { return table_.measure(); }
  const IntegralPosterior& integral() const noexcept { return integral_; }
  const std::vector<HistoryEntry>& history() const noexcept { return history_; }
  /// One entry per fit, in increasing N, filled in by run_active_bq.
  void set_history(std::vector<HistoryEntry> history);

  /// L^{-1} qbar, cached for the acquisition function.
  const Eigen::VectorXd& qbar_half() const noexcept { return qbar_half_; }

 private:
  GpPosterior gp_;
  EmbeddingTable table_;
  IntegralPosterior integral_;
  Eigen::VectorXd qbar_half_;
  std::vector<HistoryEntry> history_;
};

/// Integral variance reduction: the drop in sigma^2_Z from observing f(x),
///   a(x) = (qbar(x) - qbar^T G^{-1} k(X, x))^2 / (k(x, x) - k(x, X) G^{-1} k(X, x) + jitter).
/// Throws InvalidInput for x outside the integration domain.
double acquisition_ivr(const Eigen::VectorXd& x, const BqState& state);

/// Arg-max of the acquisition over n_candidates uniform draws from the
/// measure's search box, then `refine_steps` rounds of coordinate-wise
/// golden-section search around the best. Never returns a point within
/// 1e-9 of an observed location or of one of its orbit images; the next
/// best candidate is used instead. Deterministic given the seed.
Eigen::VectorXd select_next(const BqState& state, std::uint64_t seed, std::size_t n_candidates,
                            std::size_t refine_steps = 10);

/// Draws from the measure: uniform on a box, normal for a Gaussian.
Eigen::VectorXd sample_measure(const Measure& measure, std::mt19937_64& rng);

/// The first n draws of the stream seeded with `seed`. Shared by every
/// method run with that seed.
Eigen::MatrixXd initial_design(const Measure& measure, std::size_t n, std::uint64_t seed);

struct ActiveConfig {
  std::size_t n_initial = 5;
  std::size_t n_total = 25;
  std::uint64_t seed = 0;
  SignFlipGroup group;
  /// MLL refit after every acquisition, or fixed hyperparameters. The grid
  /// lengthscale range is scaled by the measure's search-box diagonal.
  SearchConfig hyper;
  std::size_t n_candidates = 500;
  std::size_t refine_steps = 10;
};

/// Initial design, then fit / record / acquire until n_total evaluations.
/// Throws IntegrandError (with the offending point) on a non-finite value.
BqState run_active_bq(const Integrand& f, const Measure& measure, const ActiveConfig& config);

struct McEstimate {
  std::size_t n = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// Plain Monte Carlo over the initial_design stream: mass * mean(f) and
/// mass * sd / sqrt(n).
McEstimate mc_estimate(const Integrand& f, const Measure& measure, std::size_t n,
                       std::uint64_t seed);

/// Running Monte Carlo estimates at every n in [n_min, n_max].
std::vector<McEstimate> mc_trace(const Integrand& f, const Measure& measure, std::size_t n_min,
                                 std::size_t n_max, std::uint64_t seed);

}  // namespace invbq
