#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "invbq/kernels.hpp"

namespace invbq {

/// Evaluation locations (N x d) and exact integrand values (N).
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd Y;

  Dataset() = default;
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd y);

  std::size_t size() const noexcept { return static_cast<std::size_t>(Y.size()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(X.cols()); }
  /// Throws InvalidInput on shape mismatch or non-finite entries.
  void validate() const;
  void append(const Eigen::VectorXd& x, double y);
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Jitter schedule for exact-observation Gram matrices, as multiples of
/// theta^2 J^2: 1e-12, 1e-11, ..., 1e-6, then fail.
inline constexpr double kJitterFirst = 1e-12;
inline constexpr double kJitterLast = 1e-6;

/// Zero-mean GP conditioned on exact observations.
class GpPosterior {
 public:
  /// Factorizes gram + jitter I with the smallest jitter on the ladder that
  /// succeeds. Throws SingularGram if none does, InvalidInput on bad data.
  static GpPosterior fit(KernelSpec spec, Dataset data);

  const KernelSpec& spec() const noexcept { return spec_; }
  const Dataset& data() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }
  /// Lower-triangular L with L L^T = gram + jitter_used I.
  const Eigen::MatrixXd& cholesky_factor() const noexcept { return chol_; }
  /// (gram + jitter I)^{-1} Y
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  double jitter_used() const noexcept { return jitter_; }

  Prediction predict(const Eigen::VectorXd& x) const;

  /// (gram + jitter I)^{-1} b
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  /// L^{-1} b, so that b^T (gram + jitter I)^{-1} b = ||L^{-1} b||^2.
  Eigen::VectorXd half_solve(const Eigen::VectorXd& b) const;

  /// -1/2 Y^T G^{-1} Y - 1/2 log det G - N/2 log 2 pi, with the jittered G.
  double log_marginal_likelihood() const;

 private:
  GpPosterior(KernelSpec spec, Dataset data);

  KernelSpec spec_;
  Dataset data_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd weights_;
  double jitter_ = 0.0;
};

/// Requires N >= 1. Propagates SingularGram.
double log_marginal_likelihood(const KernelSpec& spec, const Dataset& data);

/// How kernel hyperparameters are chosen.
struct SearchConfig {
  enum class Mode { mll, fixed };
  Mode mode = Mode::mll;
  /// Returned unchanged in fixed mode.
  RbfParams fixed;

  std::size_t lengthscale_points = 25;
  std::size_t variance_points = 25;
  /// Lengthscale grid spans [lo, hi] * domain_diagonal (log-uniform).
  double domain_diagonal = 1.0;
  double lengthscale_lo = 0.1;
  double lengthscale_hi = 10.0;
  /// Variance grid spans [lo, hi] * var(Y) (log-uniform).
  double variance_lo = 1e-2;
  double variance_hi = 1e3;
  /// Coordinate-descent sweeps after the grid search.
  std::size_t refine_steps = 20;
};

/// Maximizes the log marginal likelihood over a log-space grid followed by
/// coordinate refinement. Deterministic; ties go to the lowest grid index.
/// In fixed mode returns search.fixed without touching the data.
RbfParams optimize_hyperparameters(const Dataset& data, const SignFlipGroup& group,
                                   const SearchConfig& search);

}  // namespace invbq
