#include "invbq/embeddings.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "invbq/errors.hpp"
#include "invbq/simd/dispatch.hpp"

namespace invbq {

namespace detail {

double erf_diff(double a, double b) noexcept {
  if (a >= 0.0) return std::erfc(a) - std::erfc(b);
  if (b <= 0.0) return std::erfc(-b) - std::erfc(-a);
  return std::erf(b) - std::erf(a);
}

double phi(double z, double lengthscale) noexcept {
  const double l = lengthscale;
  return std::sqrt(std::numbers::pi / 2.0) * l * z * std::erf(z / (std::numbers::sqrt2 * l)) +
         l * l * std::exp(-z * z / (2.0 * l * l));
}

double box_pair_integral(double a, double b, double c, double d, double lengthscale) noexcept {
  return phi(b - c, lengthscale) - phi(a - c, lengthscale) - phi(b - d, lengthscale) +
         phi(a - d, lengthscale);
}

}  // namespace detail

namespace {

void check_point(const Measure& measure, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != measure.dim()) {
    throw InvalidInput("embedding: point has dimension " + std::to_string(x.size()) +
                       ", measure has " + std::to_string(measure.dim()));
  }
}

void check_group(const Measure& measure, const SignFlipGroup& group) {
  if (group.dim() != measure.dim()) {
    throw InvalidInput("embedding: group dimension does not match the measure");
  }
}

double box_kernel_mean(const BoxLebesgue& box, double lengthscale, const Eigen::VectorXd& x) {
  const double s = std::numbers::sqrt2 * lengthscale;
  const double c = lengthscale * std::sqrt(std::numbers::pi / 2.0);
  double prod = 1.0;
  for (Eigen::Index q = 0; q < x.size(); ++q) {
    prod *= c * detail::erf_diff((box.lower[q] - x[q]) / s, (box.upper[q] - x[q]) / s);
  }
  return prod;
}

// Gaussian normalization (l^2 / (l^2 + k s2))^{d/2}.
double gaussian_factor(double lengthscale, double variance, double k, std::size_t dim) {
  const double l2 = lengthscale * lengthscale;
  return std::pow(l2 / (l2 + k * variance), 0.5 * static_cast<double>(dim));
}

double prior_variance_for(const Measure& measure, const RbfParams& params, const SignVector& c) {
  const double det = abs_det(c);
  if (measure.is_box()) {
    const auto& box = measure.as_box();
    double prod = 1.0;
    for (std::size_t q = 0; q < c.dim(); ++q) {
      const auto qi = static_cast<Eigen::Index>(q);
      const double lo = box.lower[qi];
      const double hi = box.upper[qi];
      const double flo = c[q] < 0 ? -hi : lo;
      const double fhi = c[q] < 0 ? -lo : hi;
      prod *= detail::box_pair_integral(flo, fhi, lo, hi, params.lengthscale);
    }
    return params.variance * prod / det;
  }
  const auto& g = measure.as_gaussian();
  const Eigen::VectorXd shift = apply(c, g.mean) - g.mean;
  const double l2 = params.lengthscale * params.lengthscale;
  return params.variance * gaussian_factor(params.lengthscale, g.variance, 2.0, c.dim()) *
         std::exp(-shift.squaredNorm() / (2.0 * (l2 + 2.0 * g.variance))) / det;
}

}  // namespace

double kernel_mean_base(const Measure& measure, const RbfParams& params,
                        const Eigen::VectorXd& x) {
  check_point(measure, x);
  if (measure.is_box()) {
    return params.variance * box_kernel_mean(measure.as_box(), params.lengthscale, x);
  }
  const auto& g = measure.as_gaussian();
  const double l2 = params.lengthscale * params.lengthscale;
  return params.variance * gaussian_factor(params.lengthscale, g.variance, 1.0, measure.dim()) *
         std::exp(-(x - g.mean).squaredNorm() / (2.0 * (l2 + g.variance)));
}

double prior_variance_base(const Measure& measure, const RbfParams& params) {
  return prior_variance_for(measure, params, SignVector::identity(measure.dim()));
}

double kernel_mean_transformed(const Measure& measure, const RbfParams& params,
                               const SignFlipGroup& group, std::size_t i, std::size_t j,
                               const Eigen::VectorXd& x) {
  check_group(measure, group);
  const auto& c = group.element(group.compose_index(i, j));
  return kernel_mean_base(measure, params, apply(c, x));
}

double prior_variance_transformed(const Measure& measure, const RbfParams& params,
                                  const SignFlipGroup& group, std::size_t i, std::size_t j) {
  check_group(measure, group);
  return prior_variance_for(measure, params, group.element(group.compose_index(i, j)));
}

EmbeddingTable::EmbeddingTable(Measure measure, RbfParams params, SignFlipGroup group)
    : measure_(std::move(measure)), params_(params), group_(std::move(group)) {
  params_.validate();
  check_group(measure_, group_);
  const std::size_t J = group_.size();
  // One closed form per composed element, then spread over the J x J table.
  std::vector<double> per_element(J);
  for (std::size_t c = 0; c < J; ++c) {
    per_element[c] = prior_variance_for(measure_, params_, group_.element(c));
  }
  multiplicity_.assign(J, 0);
  qkq_.resize(static_cast<Eigen::Index>(J), static_cast<Eigen::Index>(J));
  for (std::size_t i = 0; i < J; ++i) {
    for (std::size_t j = 0; j < J; ++j) {
      const std::size_t c = group_.compose_index(i, j);
      qkq_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = per_element[c];
      ++multiplicity_[c];
    }
  }
  qkq_sum_ = qkq_.sum();
}

double EmbeddingTable::qk(std::size_t i, std::size_t j, const Eigen::VectorXd& x) const {
  return kernel_mean_transformed(measure_, params_, group_, i, j, x);
}

double EmbeddingTable::kernel_mean_sum(const Eigen::VectorXd& x) const {
  check_point(measure_, x);
  const Eigen::MatrixXd row = x.transpose();
  return kernel_mean_sum(row)[0];
}

Eigen::VectorXd EmbeddingTable::kernel_mean_sum(const Eigen::MatrixXd& X) const {
  const Eigen::Index n = X.rows();
  const std::size_t d = measure_.dim();
  if (n > 0 && static_cast<std::size_t>(X.cols()) != d) {
    throw InvalidInput("kernel_mean_sum: dimension mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (n == 0) return out;
  const std::size_t J = group_.size();

  if (measure_.is_box()) {
    const auto& box = measure_.as_box();
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::VectorXd x = X.row(r).transpose();
      double sum = 0.0;
      for (std::size_t c = 0; c < J; ++c) {
        sum += static_cast<double>(multiplicity_[c]) *
               box_kernel_mean(box, params_.lengthscale, apply(group_.element(c), x));
      }
      out[r] = params_.variance * sum;
    }
    return out;
  }

  // Gaussian: ||c.x - b|| = ||x - c.b||, so the centres are the flipped means.
  // Every multiplicity equals J, which factors out of the sum.
  const auto& g = measure_.as_gaussian();
  std::vector<double> centers(J * d);
  for (std::size_t c = 0; c < J; ++c) {
    const Eigen::VectorXd cb = apply(group_.element(c), g.mean);
    for (std::size_t q = 0; q < d; ++q) centers[c * d + q] = cb[static_cast<Eigen::Index>(q)];
  }
  const double l2 = params_.lengthscale * params_.lengthscale;
  simd::kernels().sqexp_sum(X.data(), static_cast<std::size_t>(n), d, centers.data(), J,
                            -1.0 / (2.0 * (l2 + g.variance)), out.data());
  out *= params_.variance * static_cast<double>(J) *
         gaussian_factor(params_.lengthscale, g.variance, 1.0, d);
  return out;
}

EmbeddingTable build_embedding_table(const Measure& measure, const RbfParams& params,
                                     const SignFlipGroup& group) {
  return EmbeddingTable(measure, params, group);
}

}  // namespace invbq
