#pragma once

#include <string>
#include <variant>

#include <Eigen/Core>

namespace invbq {

/// Lebesgue measure (density 1) on the box [lower, upper].
struct BoxLebesgue {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Isotropic normal density N(mean, variance I) on R^d.
struct GaussianIso {
  Eigen::VectorXd mean;
  double variance = 1.0;
};

/// Integration domain and density.
class Measure {
 public:
  /// Throws InvalidInput unless lower < upper componentwise.
  static Measure box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  /// Symmetric box [-half_width, half_width]^dim.
  static Measure centered_box(std::size_t dim, double half_width);
  /// Throws InvalidInput unless variance > 0.
  static Measure gaussian(Eigen::VectorXd mean, double variance);

  std::size_t dim() const noexcept;
  bool is_box() const noexcept { return std::holds_alternative<BoxLebesgue>(v_); }
  bool is_gaussian() const noexcept { return std::holds_alternative<GaussianIso>(v_); }
  const BoxLebesgue& as_box() const;
  const GaussianIso& as_gaussian() const;

  /// "box" or "gaussian"
  std::string label() const;

  /// Box membership for Lebesgue; always true for the Gaussian (support R^d).
  bool contains(const Eigen::VectorXd& x) const;
  double density(const Eigen::VectorXd& x) const;
  /// Volume of the box; 1 for the Gaussian (a probability measure).
  double mass() const;

  /// Box used to draw acquisition candidates: the domain itself for
  /// Lebesgue, mean +- kGaussianSearchRadius standard deviations otherwise.
  BoxLebesgue search_box() const;
  /// Euclidean diagonal of search_box().
  double diagonal() const;

  static constexpr double kGaussianSearchRadius = 4.0;

 private:
  explicit Measure(std::variant<BoxLebesgue, GaussianIso> v) : v_(std::move(v)) {}
  std::variant<BoxLebesgue, GaussianIso> v_;
};

}  // namespace invbq
