#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "invbq/kernels.hpp"
#include "invbq/measure.hpp"
#include "invbq/symmetry_group.hpp"

namespace invbq {

// Closed-form RBF kernel integrals against a box-Lebesgue or isotropic
// Gaussian measure, and their versions under sign-flip transforms.
//
// Box, per dimension q with kernel lengthscale l:
//   qK_q(x)  = l sqrt(pi/2) [erf((u-x)/(sqrt2 l)) - erf((lo-x)/(sqrt2 l))]
//   int_a^b int_c^d exp(-(s-t)^2/(2 l^2)) dt ds = phi(b-c) - phi(a-c) - phi(b-d) + phi(a-d)
//   phi(z)   = sqrt(pi/2) l z erf(z/(sqrt2 l)) + l^2 exp(-z^2/(2 l^2)),  phi'' = exp(-z^2/(2 l^2))
// Gaussian N(b, s2 I):
//   qK(x)    = theta^2 (l^2/(l^2+s2))^{d/2} exp(-||x-b||^2 / (2(l^2+s2)))
//   qKq_c    = theta^2 (l^2/(l^2+2 s2))^{d/2} exp(-||c.b - b||^2 / (2(l^2+2 s2)))

/// int k(s, x) pi(s) ds
double kernel_mean_base(const Measure& measure, const RbfParams& params, const Eigen::VectorXd& x);

/// int int k(s, t) pi(s) pi(t) ds dt
double prior_variance_base(const Measure& measure, const RbfParams& params);

/// qK_ij(x) = int k(T_i s, T_j x) pi(s) ds = qK(c_ij . x), c_ij = compose(e_i, e_j).
double kernel_mean_transformed(const Measure& measure, const RbfParams& params,
                               const SignFlipGroup& group, std::size_t i, std::size_t j,
                               const Eigen::VectorXd& x);

/// qKq_ij = |det^{-1}(c_ij)| int_{c_ij Omega} int_Omega k(s, t) pi(c_ij s) pi(t) ds dt
/// For a box the flipped dimensions integrate over [-u, -l] instead of [l, u].
double prior_variance_transformed(const Measure& measure, const RbfParams& params,
                                  const SignFlipGroup& group, std::size_t i, std::size_t j);

/// All J x J prior variances plus the kernel means, dispatched on the
/// composed element (qK_ij depends on (i, j) only through c_ij).
class EmbeddingTable {
 public:
  EmbeddingTable(Measure measure, RbfParams params, SignFlipGroup group);

  const Measure& measure() const noexcept { return measure_; }
  const RbfParams& params() const noexcept { return params_; }
  const SignFlipGroup& group() const noexcept { return group_; }

  double qkq(std::size_t i, std::size_t j) const { return qkq_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }
  const Eigen::MatrixXd& qkq_table() const noexcept { return qkq_; }
  double qk(std::size_t i, std::size_t j, const Eigen::VectorXd& x) const;

  /// sum_{i,j} qKq_ij: prior variance of the integral under the invariant kernel.
  double prior_variance_sum() const noexcept { return qkq_sum_; }
  /// sum_{i,j} qK_ij(x) = int k_f(s, x) pi(s) ds
  double kernel_mean_sum(const Eigen::VectorXd& x) const;
  /// kernel_mean_sum for every row of X.
  Eigen::VectorXd kernel_mean_sum(const Eigen::MatrixXd& X) const;

  /// How many (i, j) pairs compose to element c. J for every c.
  std::size_t multiplicity(std::size_t c) const { return multiplicity_.at(c); }

 private:
  Measure measure_;
  RbfParams params_;
  SignFlipGroup group_;
  Eigen::MatrixXd qkq_;
  double qkq_sum_ = 0.0;
  std::vector<std::size_t> multiplicity_;
};

EmbeddingTable build_embedding_table(const Measure& measure, const RbfParams& params,
                                     const SignFlipGroup& group);

namespace detail {
/// erf(b) - erf(a) for a <= b, without cancellation in the tails.
double erf_diff(double a, double b) noexcept;
/// Second antiderivative of exp(-z^2 / (2 l^2)).
double phi(double z, double lengthscale) noexcept;
/// int_a^b int_c^d exp(-(s-t)^2 / (2 l^2)) dt ds
double box_pair_integral(double a, double b, double c, double d, double lengthscale) noexcept;
}  // namespace detail

}  // namespace invbq
