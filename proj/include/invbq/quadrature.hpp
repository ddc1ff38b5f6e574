#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "invbq/kernels.hpp"
#include "invbq/measure.hpp"

namespace invbq::quad {

// Adaptive Gauss-Kronrod (15-point) reference integration, nested for
// dimension 2. Used as the ground truth for the analytic embeddings and for
// the test-function reference integrals; never on the BQ fast path.

/// Half-width, in standard deviations, of the box a Gaussian measure is
/// truncated to. The neglected mass per dimension is below 2e-23.
inline constexpr double kGaussianTruncation = 10.0;

struct Options {
  double rel_tol = 1e-10;
  unsigned max_depth = 18;
};

/// int_a^b f. Throws OracleFailure if the error estimate exceeds
/// rel_tol * int |f| after max_depth bisections.
double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    const Options& opt = {});

/// Nested iterated integral over [lower, upper] (dimension 1 or 2).
double integrate_box(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                     const Options& opt = {});

/// As above, with each axis additionally cut at the coordinates of `peaks`.
double integrate_box(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                     const std::vector<Eigen::VectorXd>& peaks, const Options& opt);

/// int f(x) pi(x) dx. Gaussian measures are truncated to mean +- 10 sd.
double integrate_measure(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Measure& measure, const Options& opt = {});
double integrate_measure(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Measure& measure, std::vector<Eigen::VectorXd> peaks,
                         const Options& opt);

/// Numerical qK(c . x) = int k(s, c . x) pi(s) ds.
double kernel_mean(const Measure& measure, const RbfParams& params, const SignVector& c,
                   const Eigen::VectorXd& x, const Options& opt = {});

/// Numerical qKq under the composed flip c, i.e. int int k(c . s, t) pi(s) pi(t).
/// The RBF kernel and both measures factor over dimensions, so this is a
/// product of one-dimensional double integrals, each done by nested
/// adaptive quadrature.
double prior_variance(const Measure& measure, const RbfParams& params, const SignVector& c,
                      const Options& opt = {});

/// Composite Gauss-Legendre tensor rule on a box: `panels` equal panels per
/// dimension, `order` nodes per panel. Used where nested adaptive quadrature
/// would be too slow (four-dimensional posterior covariance integrals).
struct TensorRule {
  Eigen::MatrixXd nodes;    // M x d
  Eigen::VectorXd weights;  // M
};
TensorRule gauss_legendre_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                              int panels, int order);
/// Tensor rule for a measure, with the density folded into the weights.
TensorRule gauss_legendre_measure(const Measure& measure, int panels, int order);

}  // namespace invbq::quad
