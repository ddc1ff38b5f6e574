#include "invbq/testbed.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "invbq/errors.hpp"

namespace invbq::testbed {

namespace {

void require_dim(const Eigen::VectorXd& x, Eigen::Index d, const char* name) {
  if (x.size() != d) {
    throw InvalidInput(std::string(name) + ": expected a " + std::to_string(d) +
                       "-vector, got dimension " + std::to_string(x.size()));
  }
}

}  // namespace

double hennig1d(double x) {
  const double s = std::sin(3.0 * x);
  return std::exp(-x * x - s * s);
}

double hennig2d(const Eigen::VectorXd& x) {
  require_dim(x, 2, "hennig2d");
  const double r2 = x.squaredNorm();
  const double quad = x[0] * x[0] + x[0] * x[1] + x[1] * x[1];
  return std::exp(-std::sin(3.0 * r2) - quad);
}

double circular_gaussian(const Eigen::VectorXd& x, double mu, double sigma) {
  if (!(sigma > 0.0)) throw InvalidInput("circular_gaussian: sigma must be positive");
  const double r = x.norm();
  const double s2 = sigma * sigma;
  return r * r * std::exp(-(r - mu) * (r - mu) / (2.0 * s2)) / (2.0 * std::numbers::pi * s2);
}

double sombrero2d(const Eigen::VectorXd& x, double c) {
  require_dim(x, 2, "sombrero2d");
  const double z = std::numbers::pi * x.norm() * c;
  if (std::abs(z) < 1e-4) return 1.0 - z * z / 6.0;
  return std::sin(z) / z;
}

double bessel_j1(double v) {
  if (v < 0.0) return -bessel_j1(-v);
  if (v < 1e-3) {
    const double h = 0.5 * v;
    return h * (1.0 - h * h / 2.0 + h * h * h * h / 12.0);
  }
  return boost::math::cyl_bessel_j(1, v);
}

double airy_psf(const Eigen::VectorXd& x, double scale) {
  require_dim(x, 2, "airy_psf");
  if (!(scale > 0.0)) throw InvalidInput("airy_psf: scale must be positive");
  const double v = scale * x.norm();
  if (v < 1e-3) {
    // 2 J1(v) / v = 1 - v^2/8 + v^4/192 - ...
    const double a = 1.0 - v * v / 8.0 + v * v * v * v / 192.0;
    return a * a;
  }
  const double a = 2.0 * bessel_j1(v) / v;
  return a * a;
}

double TestFunctionDescriptor::operator()(const Eigen::VectorXd& x) const {
  if (x.size() != static_cast<Eigen::Index>(dim)) {
    throw InvalidInput(name + ": expected dimension " + std::to_string(dim) + ", got " +
                       std::to_string(x.size()));
  }
  if (name == "hennig1d") return hennig1d(x[0]);
  if (name == "hennig2d") return hennig2d(x);
  if (name == "circular_gaussian") {
    return circular_gaussian(x, parameters.at("mu"), parameters.at("sigma"));
  }
  if (name == "sombrero2d") return sombrero2d(x, parameters.at("c"));
  if (name == "airy_psf") return airy_psf(x, parameters.at("scale"));
  throw ConfigError("unknown test function '" + name + "'");
}

std::vector<std::string> names() {
  return {"hennig1d", "hennig2d", "circular_gaussian", "sombrero2d", "airy_psf"};
}

TestFunctionDescriptor find(const std::string& name,
                            const std::map<std::string, double>& overrides) {
  const SignVector flip_x({-1, 1});
  const SignVector flip_y({1, -1});
  const SignVector point2({-1, -1});
  auto make = [&](std::size_t dim, std::vector<SignVector> gens,
                  std::map<std::string, double> params) {
    return TestFunctionDescriptor{name, dim, std::move(gens), Measure::centered_box(dim, 3.0),
                                  std::move(params)};
  };

  TestFunctionDescriptor desc = [&] {
    if (name == "hennig1d") return make(1, {SignVector({-1})}, {});
    if (name == "hennig2d") return make(2, {point2}, {});
    if (name == "circular_gaussian") {
      return make(2, {flip_x, flip_y},
                  {{"mu", kCircularGaussianMu}, {"sigma", kCircularGaussianSigma}});
    }
    if (name == "sombrero2d") return make(2, {flip_x, flip_y}, {{"c", kSombreroFrequency}});
    if (name == "airy_psf") return make(2, {flip_x, flip_y}, {{"scale", kAiryScale}});
    throw ConfigError("unknown test function '" + name + "'");
  }();

  for (const auto& [key, value] : overrides) {
    auto it = desc.parameters.find(key);
    if (it == desc.parameters.end()) {
      throw ConfigError("test function '" + name + "' has no parameter '" + key + "'");
    }
    it->second = value;
  }
  if (name == "circular_gaussian" && !(desc.parameters.at("sigma") > 0.0)) {
    throw ConfigError("circular_gaussian: sigma must be positive");
  }
  if (name == "sombrero2d" && !(desc.parameters.at("c") > 0.0)) {
    throw ConfigError("sombrero2d: c must be positive");
  }
  if (name == "airy_psf" && !(desc.parameters.at("scale") > 0.0)) {
    throw ConfigError("airy_psf: scale must be positive");
  }
  return desc;
}

Integrand make_integrand(const TestFunctionDescriptor& descriptor) {
  return Integrand{[descriptor](const Eigen::VectorXd& x) { return descriptor(x); },
                   descriptor.dim, descriptor.declared_group()};
}

double reference_integral(const TestFunctionDescriptor& descriptor, const Measure& measure,
                          const quad::Options& opt) {
  if (measure.dim() != descriptor.dim) {
    throw ConfigError("reference_integral: measure dimension does not match " + descriptor.name);
  }
  // every test function is centred on the origin, so cut the axes there
  return quad::integrate_measure([&](const Eigen::VectorXd& x) { return descriptor(x); }, measure,
                                 {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(descriptor.dim))},
                                 opt);
}

}  // namespace invbq::testbed
