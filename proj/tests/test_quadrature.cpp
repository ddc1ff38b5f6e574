#include <doctest.h>

#include <cmath>
#include <numbers>

#include "invbq/errors.hpp"
#include "invbq/quadrature.hpp"

using namespace invbq;

TEST_SUITE("quadrature") {

TEST_CASE("constants and odd functions") {
  const auto box = Measure::centered_box(2, 3.0);
  CHECK(quad::integrate_measure([](const Eigen::VectorXd&) { return 1.0; }, box) ==
        doctest::Approx(36.0).epsilon(1e-14));
  CHECK(std::abs(quad::integrate_measure([](const Eigen::VectorXd& x) { return x[0]; },
                                         Measure::centered_box(1, 3.0))) < 1e-12);
}

TEST_CASE("Gaussian measure integrates to one and recovers its moments") {
  Eigen::VectorXd b(2);
  b << 1.0, -0.5;
  const auto g = Measure::gaussian(b, 0.7);
  CHECK(quad::integrate_measure([](const Eigen::VectorXd&) { return 1.0; }, g) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quad::integrate_measure([](const Eigen::VectorXd& x) { return x[1]; }, g) ==
        doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(quad::integrate_measure([](const Eigen::VectorXd& x) { return x[0] * x[0]; }, g) ==
        doctest::Approx(1.0 + 0.7).epsilon(1e-12));
}

TEST_CASE("reversed and empty intervals") {
  auto f = [](double x) { return std::cos(x); };
  CHECK(quad::integrate_1d(f, 0.0, 0.0) == 0.0);
  CHECK(quad::integrate_1d(f, 1.0, 0.0) == doctest::Approx(-std::sin(1.0)).epsilon(1e-14));
}

TEST_CASE("non-convergence is an oracle failure") {
  quad::Options opt;
  opt.max_depth = 1;
  opt.rel_tol = 1e-14;
  CHECK_THROWS_AS(quad::integrate_1d([](double x) { return std::sin(400.0 * x * x); }, 0.0, 3.0, opt),
                  OracleFailure);
  CHECK_THROWS_AS(quad::integrate_1d([](double x) { return 1.0 / x; }, 0.0, 1.0), OracleFailure);
}

TEST_CASE("tolerances below double precision are refused") {
  quad::Options opt;
  opt.rel_tol = 1e-17;
  CHECK_THROWS_AS(quad::integrate_1d([](double x) { return x; }, 0.0, 1.0, opt), OracleFailure);
}

TEST_CASE("cutting at a narrow peak") {
  // narrow bump inside a long interval
  auto bump = [](const Eigen::VectorXd& x) { return std::exp(-0.5 * std::pow((x[0] - 7.3) / 0.05, 2)); };
  const double exact = 0.05 * std::sqrt(2.0 * std::numbers::pi);
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(1, -20.0), hi = Eigen::VectorXd::Constant(1, 20.0);
  const double cut = quad::integrate_box(bump, lo, hi, {Eigen::VectorXd::Constant(1, 7.3)}, {});
  CHECK(cut == doctest::Approx(exact).epsilon(1e-10));
}

TEST_CASE("dimension limits") {
  CHECK_THROWS_AS(quad::integrate_box([](const Eigen::VectorXd&) { return 1.0; },
                                      Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3)),
                  InvalidInput);
}

TEST_CASE("Gauss-Legendre tensor rules") {
  for (int order : {2, 5, 10}) {
    const auto rule = quad::gauss_legendre_box(Eigen::VectorXd::Constant(1, -1.0),
                                               Eigen::VectorXd::Constant(1, 2.0), 3, order);
    CHECK(rule.nodes.rows() == 3 * order);
    CHECK(rule.weights.sum() == doctest::Approx(3.0).epsilon(1e-14));
    // exact for polynomials of degree 2 order - 1 on each panel
    double p = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.rows(); ++i) {
      p += rule.weights[i] * std::pow(rule.nodes(i, 0), 2 * order - 1);
    }
    const double k = 2.0 * order;
    CHECK(p == doctest::Approx((std::pow(2.0, k) - 1.0) / k).epsilon(1e-12));
  }
  const auto rule2 = quad::gauss_legendre_measure(Measure::centered_box(2, 3.0), 4, 8);
  CHECK(rule2.nodes.rows() == 32 * 32);
  CHECK(rule2.weights.sum() == doctest::Approx(36.0).epsilon(1e-13));
  const auto rg = quad::gauss_legendre_measure(Measure::gaussian(Eigen::VectorXd::Ones(2), 1.0), 8, 10);
  CHECK(rg.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

}  // TEST_SUITE
