#include "invbq/measure.hpp"

#include <cmath>
#include <numbers>

#include "invbq/errors.hpp"

namespace invbq {

Measure Measure::box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw InvalidInput("box measure: bounds must be non-empty and of equal dimension");
  }
  if (!lower.allFinite() || !upper.allFinite()) {
    throw InvalidInput("box measure: bounds must be finite");
  }
  if (!(lower.array() < upper.array()).all()) {
    throw InvalidInput("box measure: need lower < upper in every dimension");
  }
  return Measure(BoxLebesgue{std::move(lower), std::move(upper)});
}

Measure Measure::centered_box(std::size_t dim, double half_width) {
  const auto d = static_cast<Eigen::Index>(dim);
  return box(Eigen::VectorXd::Constant(d, -half_width), Eigen::VectorXd::Constant(d, half_width));
}

Measure Measure::gaussian(Eigen::VectorXd mean, double variance) {
  if (mean.size() == 0 || !mean.allFinite()) {
    throw InvalidInput("gaussian measure: mean must be non-empty and finite");
  }
  if (!(std::isfinite(variance) && variance > 0.0)) {
    throw InvalidInput("gaussian measure: variance must be finite and positive");
  }
  return Measure(GaussianIso{std::move(mean), variance});
}

std::size_t Measure::dim() const noexcept {
  if (const auto* b = std::get_if<BoxLebesgue>(&v_)) return static_cast<std::size_t>(b->lower.size());
  return static_cast<std::size_t>(std::get<GaussianIso>(v_).mean.size());
}

const BoxLebesgue& Measure::as_box() const {
  if (!is_box()) throw ConfigError("measure is not a box");
  return std::get<BoxLebesgue>(v_);
}

const GaussianIso& Measure::as_gaussian() const {
  if (!is_gaussian()) throw ConfigError("measure is not Gaussian");
  return std::get<GaussianIso>(v_);
}

std::string Measure::label() const { return is_box() ? "box" : "gaussian"; }

bool Measure::contains(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) return false;
  if (!x.allFinite()) return false;
  if (const auto* b = std::get_if<BoxLebesgue>(&v_)) {
    return (x.array() >= b->lower.array()).all() && (x.array() <= b->upper.array()).all();
  }
  return true;
}

double Measure::density(const Eigen::VectorXd& x) const {
  if (is_box()) return contains(x) ? 1.0 : 0.0;
  const auto& g = std::get<GaussianIso>(v_);
  const double d = static_cast<double>(g.mean.size());
  return std::exp(-(x - g.mean).squaredNorm() / (2.0 * g.variance)) /
         std::pow(2.0 * std::numbers::pi * g.variance, 0.5 * d);
}

double Measure::mass() const {
  if (const auto* b = std::get_if<BoxLebesgue>(&v_)) return (b->upper - b->lower).prod();
  return 1.0;
}

BoxLebesgue Measure::search_box() const {
  if (const auto* b = std::get_if<BoxLebesgue>(&v_)) return *b;
  const auto& g = std::get<GaussianIso>(v_);
  const double r = kGaussianSearchRadius * std::sqrt(g.variance);
  return BoxLebesgue{g.mean.array() - r, g.mean.array() + r};
}

double Measure::diagonal() const {
  const auto b = search_box();
  return (b.upper - b.lower).norm();
}

}  // namespace invbq
