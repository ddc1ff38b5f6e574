#include "invbq/kernels.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "invbq/errors.hpp"
#include "invbq/simd/dispatch.hpp"

namespace invbq {

void RbfParams::validate() const {
  if (!(std::isfinite(variance) && variance > 0.0)) {
    throw InvalidInput("RBF variance must be finite and positive, got " + std::to_string(variance));
  }
  if (!(std::isfinite(lengthscale) && lengthscale > 0.0)) {
    throw InvalidInput("RBF lengthscale must be finite and positive, got " +
                       std::to_string(lengthscale));
  }
}

double rbf(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const RbfParams& params) {
  if (x.size() != y.size()) {
    throw InvalidInput("rbf: dimension mismatch (" + std::to_string(x.size()) + " vs " +
                       std::to_string(y.size()) + ")");
  }
  if (!x.allFinite() || !y.allFinite()) throw InvalidInput("rbf: non-finite input");
  const double r2 = (x - y).squaredNorm();
  return params.variance * std::exp(-r2 / (2.0 * params.lengthscale * params.lengthscale));
}

double invariant_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const KernelSpec& spec) {
  const auto d = static_cast<Eigen::Index>(spec.dim());
  if (x.size() != d || y.size() != d) {
    throw InvalidInput("invariant_kernel: point dimension does not match the group");
  }
  double sum = 0.0;
  for (const auto& g : spec.group.elements()) {
    const Eigen::VectorXd gx = apply(g, x);
    for (const auto& h : spec.group.elements()) {
      sum += rbf(gx, apply(h, y), spec.params);
    }
  }
  return sum;
}

namespace {

// Row-major J x d block of the images c (.) x.
std::vector<double> orbit_centers(const SignFlipGroup& group, const Eigen::VectorXd& x) {
  const std::size_t d = group.dim();
  std::vector<double> centers(group.size() * d);
  for (std::size_t c = 0; c < group.size(); ++c) {
    const auto& e = group.element(c);
    for (std::size_t q = 0; q < d; ++q) {
      const double v = x[static_cast<Eigen::Index>(q)];
      centers[c * d + q] = e[q] < 0 ? -v : v;
    }
  }
  return centers;
}

}  // namespace

Eigen::VectorXd kernel_row(const KernelSpec& spec, const Eigen::MatrixXd& X,
                           const Eigen::VectorXd& x) {
  const std::size_t d = spec.dim();
  if (static_cast<std::size_t>(x.size()) != d ||
      (X.rows() > 0 && static_cast<std::size_t>(X.cols()) != d)) {
    throw InvalidInput("kernel_row: dimension mismatch");
  }
  Eigen::VectorXd out(X.rows());
  if (X.rows() == 0) return out;
  const auto centers = orbit_centers(spec.group, x);
  const double ell = spec.params.lengthscale;
  simd::kernels().sqexp_sum(X.data(), static_cast<std::size_t>(X.rows()), d, centers.data(),
                            spec.group.size(), -1.0 / (2.0 * ell * ell), out.data());
  out *= spec.params.variance * static_cast<double>(spec.group.size());
  return out;
}

double kernel_diag(const KernelSpec& spec, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd row = x.transpose();
  return kernel_row(spec, row, x)[0];
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& X, const KernelSpec& spec) {
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    G.col(m) = kernel_row(spec, X, X.row(m).transpose());
  }
  // Exact in exact arithmetic; mirror so downstream sees a symmetric matrix.
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose().triangularView<Eigen::StrictlyUpper>();
  return G;
}

}  // namespace invbq
