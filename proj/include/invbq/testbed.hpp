#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "invbq/integrand.hpp"
#include "invbq/measure.hpp"
#include "invbq/quadrature.hpp"
#include "invbq/symmetry_group.hpp"

namespace invbq::testbed {

/// exp(-x^2 - sin^2(3x))
double hennig1d(double x);

/// exp(-sin(3 ||x||^2) - x^T S x), S = [[1, 0.5], [0.5, 1]]
double hennig2d(const Eigen::VectorXd& x);

/// ||x||^2 exp(-(||x|| - mu)^2 / (2 sigma^2)) / (2 pi sigma^2). Throws
/// InvalidInput for sigma <= 0.
double circular_gaussian(const Eigen::VectorXd& x, double mu, double sigma);

/// sin(pi c ||x||) / (pi c ||x||), 1 at the origin.
double sombrero2d(const Eigen::VectorXd& x, double c);

/// Airy pattern (2 J1(v) / v)^2, v = scale ||x||, 1 at the origin.
double airy_psf(const Eigen::VectorXd& x, double scale);

/// Bessel function of the first kind, order one (std::cyl_bessel_j, with a
/// series near zero).
double bessel_j1(double v);

/// Default parameters. The published experiments do not state them.
inline constexpr double kCircularGaussianMu = 2.0;
inline constexpr double kCircularGaussianSigma = 1.0;
inline constexpr double kSombreroFrequency = 2.0;
inline constexpr double kAiryScale = 10.0;

struct TestFunctionDescriptor {
  std::string name;
  std::size_t dim = 0;
  /// Declared invariances; the closure is the "all symmetries" group.
  std::vector<SignVector> generators;
  Measure default_domain;
  std::map<std::string, double> parameters;

  SignFlipGroup declared_group() const { return SignFlipGroup::from_generators(generators, dim); }
  /// Evaluates the function with this descriptor's parameters.
  double operator()(const Eigen::VectorXd& x) const;
};

/// Names accepted by find(): hennig1d, hennig2d, circular_gaussian,
/// sombrero2d, airy_psf.
std::vector<std::string> names();

/// Descriptor by name, with optional parameter overrides. Throws
/// ConfigError for an unknown name or parameter.
TestFunctionDescriptor find(const std::string& name,
                            const std::map<std::string, double>& overrides = {});

Integrand make_integrand(const TestFunctionDescriptor& descriptor);

/// int f dpi by nested adaptive quadrature (dimension <= 2). Gaussian
/// measures are truncated to mean +- 10 sd. Throws OracleFailure when the
/// tolerance is not reached.
double reference_integral(const TestFunctionDescriptor& descriptor, const Measure& measure,
                          const quad::Options& opt = {});

}  // namespace invbq::testbed
