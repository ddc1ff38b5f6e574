#include "invbq/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "invbq/errors.hpp"

namespace invbq {

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y) : X(std::move(x)), Y(std::move(y)) {
  validate();
}

void Dataset::validate() const {
  if (X.rows() != Y.size()) {
    throw InvalidInput("dataset: X has " + std::to_string(X.rows()) + " rows but Y has " +
                       std::to_string(Y.size()) + " entries");
  }
  if (!X.allFinite() || !Y.allFinite()) throw InvalidInput("dataset: non-finite entries");
}

void Dataset::append(const Eigen::VectorXd& x, double y) {
  if (X.rows() > 0 && x.size() != X.cols()) throw InvalidInput("dataset: dimension mismatch");
  if (!x.allFinite() || !std::isfinite(y)) throw InvalidInput("dataset: non-finite entries");
  const Eigen::Index n = X.rows();
  X.conservativeResize(n + 1, x.size());
  X.row(n) = x.transpose();
  Y.conservativeResize(n + 1);
  Y[n] = y;
}

namespace {

struct Factor {
  Eigen::MatrixXd L;
  double jitter = 0.0;
};

// Kernel prior-variance bound theta^2 J^2. Equals trace(G)/N for the
// stationary kernel; for the invariant kernel trace(G)/N moves as points are
// added, and a jitter that moves with it breaks the one-step IVR identity.
double jitter_scale(const KernelSpec& spec) {
  const double j = static_cast<double>(spec.group.size());
  return spec.params.variance * j * j;
}

// Walks the jitter ladder. Returns nothing if every level fails.
std::optional<Factor> factorize(const Eigen::MatrixXd& G, double scale) {
  if (!(std::isfinite(scale) && scale > 0.0)) return std::nullopt;
  for (double rel = kJitterFirst; rel <= kJitterLast * 1.0000001; rel *= 10.0) {
    const double jitter = rel * scale;
    Eigen::MatrixXd A = G;
    A.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) continue;
    Eigen::MatrixXd L = llt.matrixL();
    if (!L.diagonal().allFinite() || (L.diagonal().array() <= 0.0).any()) continue;
    return Factor{std::move(L), jitter};
  }
  return std::nullopt;
}

double lml_from_factor(const Eigen::MatrixXd& L, const Eigen::VectorXd& y) {
  const Eigen::VectorXd v = L.triangularView<Eigen::Lower>().solve(y);
  const double n = static_cast<double>(y.size());
  return -0.5 * v.squaredNorm() - L.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

}  // namespace

GpPosterior::GpPosterior(KernelSpec spec, Dataset data)
    : spec_(std::move(spec)), data_(std::move(data)) {}

GpPosterior GpPosterior::fit(KernelSpec spec, Dataset data) {
  spec.params.validate();
  data.validate();
  if (data.size() > 0 && data.dim() != spec.dim()) {
    throw InvalidInput("fit: data dimension " + std::to_string(data.dim()) +
                       " does not match kernel dimension " + std::to_string(spec.dim()));
  }
  GpPosterior post(std::move(spec), std::move(data));
  if (post.size() == 0) return post;

  const Eigen::MatrixXd G = gram(post.data_.X, post.spec_);
  auto factor = factorize(G, jitter_scale(post.spec_));
  if (!factor) {
    throw SingularGram("Gram matrix (N=" + std::to_string(post.size()) +
                       ") is not positive definite up to jitter " + std::to_string(kJitterLast) +
                       " x theta^2 J^2; inputs are likely duplicated or orbit-equivalent");
  }
  post.chol_ = std::move(factor->L);
  post.jitter_ = factor->jitter;
  post.weights_ = post.solve(post.data_.Y);
  return post;
}

Eigen::VectorXd GpPosterior::half_solve(const Eigen::VectorXd& b) const {
  return chol_.triangularView<Eigen::Lower>().solve(b);
}

Eigen::VectorXd GpPosterior::solve(const Eigen::VectorXd& b) const {
  const Eigen::VectorXd v = half_solve(b);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(v);
}

Prediction GpPosterior::predict(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != spec_.dim()) {
    throw InvalidInput("predict: point dimension does not match the kernel");
  }
  const double prior = kernel_diag(spec_, x);
  if (size() == 0) return {0.0, prior};
  const Eigen::VectorXd k = kernel_row(spec_, data_.X, x);
  const double mean = k.dot(weights_);
  const double var = prior - half_solve(k).squaredNorm();
  return {mean, std::max(var, 0.0)};
}

double GpPosterior::log_marginal_likelihood() const {
  if (size() == 0) throw InvalidInput("log marginal likelihood needs at least one observation");
  return lml_from_factor(chol_, data_.Y);
}

double log_marginal_likelihood(const KernelSpec& spec, const Dataset& data) {
  if (data.size() == 0) {
    throw InvalidInput("log marginal likelihood needs at least one observation");
  }
  return GpPosterior::fit(spec, data).log_marginal_likelihood();
}

namespace {

// LML as a function of the variance for one lengthscale. The Gram matrix is
// linear in theta^2 and so is the jitter, so one
// factorization of the unit-variance Gram serves every variance:
//   L(theta^2) = theta L_1,  y^T G^{-1} y = ||L_1^{-1} y||^2 / theta^2.
class LengthscaleSlice {
 public:
  LengthscaleSlice(const Dataset& data, const SignFlipGroup& group, double lengthscale) {
    const KernelSpec unit{{1.0, lengthscale}, group};
    auto factor = factorize(gram(data.X, unit), jitter_scale(unit));
    if (!factor) return;
    ok_ = true;
    quad_ = factor->L.triangularView<Eigen::Lower>().solve(data.Y).squaredNorm();
    logdet_half_ = factor->L.diagonal().array().log().sum();
    n_ = static_cast<double>(data.size());
  }

  bool ok() const noexcept { return ok_; }

  double lml(double variance) const {
    if (!ok_) return -std::numeric_limits<double>::infinity();
    return -0.5 * quad_ / variance - logdet_half_ - 0.5 * n_ * std::log(variance) -
           0.5 * n_ * std::log(2.0 * std::numbers::pi);
  }

 private:
  bool ok_ = false;
  double quad_ = 0.0;
  double logdet_half_ = 0.0;
  double n_ = 0.0;
};

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = std::log(lo);
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return out;
}

double data_variance(const Eigen::VectorXd& y) {
  const double n = static_cast<double>(y.size());
  const double mean = y.mean();
  const double var = (y.array() - mean).square().sum() / n;
  if (var > 0.0 && std::isfinite(var)) return var;
  const double second = y.squaredNorm() / n;
  return second > 0.0 ? second : 1.0;
}

}  // namespace

RbfParams optimize_hyperparameters(const Dataset& data, const SignFlipGroup& group,
                                   const SearchConfig& search) {
  if (search.mode == SearchConfig::Mode::fixed) {
    search.fixed.validate();
    return search.fixed;
  }
  data.validate();
  if (data.size() < 2) throw InvalidInput("hyperparameter search needs N >= 2");
  if (search.lengthscale_points == 0 || search.variance_points == 0) {
    throw InvalidInput("hyperparameter grid must be non-empty");
  }

  const double var_y = data_variance(data.Y);
  const double ell_lo = search.lengthscale_lo * search.domain_diagonal;
  const double ell_hi = search.lengthscale_hi * search.domain_diagonal;
  const double var_lo = search.variance_lo * var_y;
  const double var_hi = search.variance_hi * var_y;
  const auto log_ells = log_grid(ell_lo, ell_hi, search.lengthscale_points);
  const auto log_vars = log_grid(var_lo, var_hi, search.variance_points);

  double best = -std::numeric_limits<double>::infinity();
  double best_log_ell = log_ells.front();
  double best_log_var = log_vars.front();
  bool any = false;
  for (double log_ell : log_ells) {
    const LengthscaleSlice slice(data, group, std::exp(log_ell));
    if (!slice.ok()) continue;
    any = true;
    for (double log_var : log_vars) {
      const double v = slice.lml(std::exp(log_var));
      if (v > best) {
        best = v;
        best_log_ell = log_ell;
        best_log_var = log_var;
      }
    }
  }
  if (!any) {
    throw SingularGram("hyperparameter search: Gram matrix singular at every grid lengthscale");
  }

  auto step = [](const std::vector<double>& g) {
    return g.size() > 1 ? g[1] - g[0] : 0.0;
  };
  double h_ell = step(log_ells);
  double h_var = step(log_vars);
  const double lo_ell = log_ells.front(), hi_ell = log_ells.back();
  const double lo_var = log_vars.front(), hi_var = log_vars.back();

  for (std::size_t it = 0; it < search.refine_steps; ++it) {
    if (h_ell > 0.0) {
      bool moved = false;
      for (double dir : {1.0, -1.0}) {
        const double cand = std::clamp(best_log_ell + dir * h_ell, lo_ell, hi_ell);
        if (cand == best_log_ell) continue;
        const double v = LengthscaleSlice(data, group, std::exp(cand)).lml(std::exp(best_log_var));
        if (v > best) {
          best = v;
          best_log_ell = cand;
          moved = true;
          break;
        }
      }
      if (!moved) h_ell *= 0.5;
    }
    if (h_var > 0.0) {
      const LengthscaleSlice slice(data, group, std::exp(best_log_ell));
      bool moved = false;
      for (double dir : {1.0, -1.0}) {
        const double cand = std::clamp(best_log_var + dir * h_var, lo_var, hi_var);
        if (cand == best_log_var) continue;
        const double v = slice.lml(std::exp(cand));
        if (v > best) {
          best = v;
          best_log_var = cand;
          moved = true;
          break;
        }
      }
      if (!moved) h_var *= 0.5;
    }
  }
  return RbfParams{std::exp(best_log_var), std::exp(best_log_ell)};
}

}  // namespace invbq
