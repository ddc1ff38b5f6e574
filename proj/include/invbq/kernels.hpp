#pragma once

#include <Eigen/Core>

#include "invbq/symmetry_group.hpp"

namespace invbq {

/// Isotropic RBF hyperparameters: variance theta^2 and lengthscale lambda.
struct RbfParams {
  double variance = 1.0;
  double lengthscale = 1.0;

  /// Throws InvalidInput unless both are finite and strictly positive.
  void validate() const;
  bool operator==(const RbfParams&) const = default;
};

/// Base RBF hyperparameters plus the invariance group. The trivial group
/// gives the standard kernel.
struct KernelSpec {
  RbfParams params;
  SignFlipGroup group;

  std::size_t dim() const noexcept { return group.dim(); }
  bool operator==(const KernelSpec&) const = default;
};

/// theta^2 exp(-||x - y||^2 / (2 lambda^2))
double rbf(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const RbfParams& params);

/// Invariant kernel: sum over all J^2 pairs (g, h) of rbf(g x, h y).
/// Reference implementation, evaluated term by term.
double invariant_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const KernelSpec& spec);

/// k_f(x, X) for every row of X (N x d), through the SIMD dispatch.
/// Uses the composition identity sum_{g,h} k(gx, hy) = J sum_c k(cx, y),
/// so the cost is O(N J) exponentials.
Eigen::VectorXd kernel_row(const KernelSpec& spec, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& x);

/// k_f(x, x)
double kernel_diag(const KernelSpec& spec, const Eigen::VectorXd& x);

/// N x N Gram matrix of the invariant kernel. Always N x N, whatever J.
Eigen::MatrixXd gram(const Eigen::MatrixXd& X, const KernelSpec& spec);

}  // namespace invbq
