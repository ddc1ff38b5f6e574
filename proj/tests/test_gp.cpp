#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>

#include "invbq/errors.hpp"
#include "invbq/gp.hpp"
#include "support/oracles.hpp"

using namespace invbq;

namespace {

SignFlipGroup flips2() {
  return SignFlipGroup::from_generators({SignVector({-1, 1}), SignVector({1, -1})}, 2);
}

Dataset smooth_data(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (auto& v : X.reshaped()) v = u(rng);
  Eigen::VectorXd Y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) Y[i] = std::exp(-0.3 * X.row(i).squaredNorm()) * std::cos(X(i, 0));
  return Dataset(X, Y);
}

}  // namespace

TEST_SUITE("gp") {

TEST_CASE("empty dataset predicts the prior") {
  const KernelSpec spec{{1.4, 0.8}, SignFlipGroup::point_symmetry(2)};
  const auto gp = GpPosterior::fit(spec, Dataset(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)));
  CHECK(gp.cholesky_factor().size() == 0);
  Eigen::VectorXd x(2);
  x << 0.3, -0.9;
  const auto p = gp.predict(x);
  CHECK(p.mean == 0.0);
  CHECK(p.variance == kernel_diag(spec, x));
}

TEST_CASE("single observation at the origin") {
  const KernelSpec spec{{2.0, 1.0}, SignFlipGroup::trivial(1)};
  const auto gp = GpPosterior::fit(spec, Dataset(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Constant(1, 3.0)));
  CHECK(gp.weights()[0] == doctest::Approx(1.5).epsilon(1e-11));
  CHECK(gp.jitter_used() == doctest::Approx(2.0 * kJitterFirst));
}

TEST_CASE("invalid data") {
  const KernelSpec spec{{1.0, 1.0}, SignFlipGroup::trivial(1)};
  Eigen::MatrixXd X(2, 1);
  X << 0.0, std::nan("");
  CHECK_THROWS_AS(Dataset(X, Eigen::VectorXd::Zero(2)), InvalidInput);
  Dataset raw;
  raw.X = X;
  raw.Y = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(GpPosterior::fit(spec, raw), InvalidInput);
  CHECK_THROWS_AS(Dataset(Eigen::MatrixXd::Zero(3, 1), Eigen::VectorXd::Zero(2)), InvalidInput);
  CHECK_THROWS_AS(GpPosterior::fit(spec, Dataset(Eigen::MatrixXd::Zero(1, 2), Eigen::VectorXd::Zero(1))),
                  InvalidInput);
  const auto gp = GpPosterior::fit(spec, Dataset(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)));
  CHECK_THROWS_AS(gp.predict(Eigen::VectorXd::Zero(2)), InvalidInput);
}

TEST_CASE("orbit-duplicate inputs are either rejected or interpolated correctly") {
  const KernelSpec spec{{1.0, 1.0}, SignFlipGroup::point_symmetry(1)};
  Eigen::MatrixXd X(2, 1);
  X << 0.8, -0.8;
  const Dataset data(X, Eigen::Vector2d(0.5, 0.5));
  try {
    const auto gp = GpPosterior::fit(spec, data);
    CHECK(gp.jitter_used() > 0.0);
    CHECK(gp.predict(X.row(0).transpose()).mean == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(gp.predict(X.row(1).transpose()).mean == doctest::Approx(0.5).epsilon(1e-6));
    const Eigen::MatrixXd A = gp.cholesky_factor() * gp.cholesky_factor().transpose();
    Eigen::MatrixXd G = gram(X, spec);
    G.diagonal().array() += gp.jitter_used();
    CHECK((A - G).cwiseAbs().maxCoeff() < 1e-12 * G.maxCoeff());
  } catch (const SingularGram&) {
    CHECK(true);
  }
}

TEST_CASE("interpolation at training points and their orbit images") {
  std::mt19937_64 rng(21);
  const auto data = smooth_data(8, 2, rng);
  const KernelSpec spec{{1.0, 1.2}, flips2()};
  const auto gp = GpPosterior::fit(spec, data);
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    const Eigen::VectorXd x = data.X.row(i).transpose();
    const auto p = gp.predict(x);
    CHECK(p.mean == doctest::Approx(data.Y[i]).epsilon(1e-6).scale(1.0));
    CHECK(p.variance < 1e-6 * kernel_diag(spec, x));
    for (const auto& g : spec.group.elements()) {
      CHECK(gp.predict(apply(g, x)).mean == doctest::Approx(data.Y[i]).scale(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("cholesky factor reproduces the jittered Gram and weights solve it") {
  std::mt19937_64 rng(22);
  const auto data = smooth_data(10, 2, rng);
  const KernelSpec spec{{0.7, 0.9}, SignFlipGroup::point_symmetry(2)};
  const auto gp = GpPosterior::fit(spec, data);
  Eigen::MatrixXd G = gram(data.X, spec);
  G.diagonal().array() += gp.jitter_used();
  const Eigen::MatrixXd& L = gp.cholesky_factor();
  CHECK((L * L.transpose() - G).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((G * gp.weights() - data.Y).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("jitter depends on the kernel, not on the data") {
  std::mt19937_64 rng(23);
  const KernelSpec spec{{0.7, 0.9}, flips2()};
  auto data = smooth_data(4, 2, rng);
  const double first = GpPosterior::fit(spec, data).jitter_used();
  CHECK(first == doctest::Approx(kJitterFirst * 0.7 * 16.0));
  Eigen::VectorXd x(2);
  x << 0.05, -0.02;  // near the fixed point, where the invariant diagonal peaks
  data.append(x, 1.0);
  CHECK(GpPosterior::fit(spec, data).jitter_used() == first);
}

TEST_CASE("posterior mean and variance are group invariant") {
  std::mt19937_64 rng(23);
  const auto data = smooth_data(9, 2, rng);
  const KernelSpec spec{{1.3, 1.0}, flips2()};
  const auto gp = GpPosterior::fit(spec, data);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const double theta = std::sqrt(spec.params.variance);
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd x(2);
    x << u(rng), u(rng);
    const auto p = gp.predict(x);
    CHECK(p.variance >= 0.0);
    CHECK(p.variance <= kernel_diag(spec, x) + 1e-8);
    for (const auto& g : spec.group.elements()) {
      const auto q = gp.predict(apply(g, x));
      CHECK(std::abs(q.mean - p.mean) <= 1e-8 * theta);
      CHECK(std::abs(q.variance - p.variance) <= 1e-8 * spec.params.variance);
    }
  }
}

TEST_CASE("nested datasets contract the predictive variance") {
  std::mt19937_64 rng(24);
  const auto big = smooth_data(12, 2, rng);
  const Dataset small(big.X.topRows(6), big.Y.head(6));
  const KernelSpec spec{{1.0, 0.8}, SignFlipGroup::point_symmetry(2)};
  const auto a = GpPosterior::fit(spec, small);
  const auto b = GpPosterior::fit(spec, big);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd x(2);
    x << u(rng), u(rng);
    CHECK(b.predict(x).variance <= a.predict(x).variance + 1e-8);
  }
}

TEST_CASE("log marginal likelihood") {
  SUBCASE("single zero observation") {
    const KernelSpec spec{{1.6, 1.0}, SignFlipGroup::point_symmetry(1)};
    Eigen::MatrixXd X = Eigen::MatrixXd::Constant(1, 1, 0.4);
    const auto gp = GpPosterior::fit(spec, Dataset(X, Eigen::VectorXd::Zero(1)));
    const double kxx = kernel_diag(spec, X.row(0).transpose());
    CHECK(gp.log_marginal_likelihood() ==
          doctest::Approx(-0.5 * std::log(kxx + gp.jitter_used()) -
                          0.5 * std::log(2.0 * std::numbers::pi))
              .epsilon(1e-14));
  }
  SUBCASE("Cholesky and dense inverse agree") {
    std::mt19937_64 rng(25);
    for (std::size_t n = 1; n <= 5; ++n) {
      const auto data = smooth_data(n, 2, rng);
      for (const auto& group : {SignFlipGroup::trivial(2), flips2()}) {
        const KernelSpec spec{{0.8, 1.1}, group};
        const auto gp = GpPosterior::fit(spec, data);
        CHECK(gp.log_marginal_likelihood() ==
              doctest::Approx(oracle::lml_dense(spec, data, gp.jitter_used())).epsilon(1e-8));
        CHECK(log_marginal_likelihood(spec, data) == gp.log_marginal_likelihood());
      }
    }
  }
  SUBCASE("needs data") {
    const KernelSpec spec{{1.0, 1.0}, SignFlipGroup::trivial(1)};
    CHECK_THROWS_AS(log_marginal_likelihood(spec, Dataset(Eigen::MatrixXd(0, 1), Eigen::VectorXd(0))),
                    InvalidInput);
  }
}

TEST_CASE("zero data prefers the smallest variance on the grid") {
  std::mt19937_64 rng(26);
  auto data = smooth_data(6, 1, rng);
  data.Y.setZero();
  SearchConfig s;
  s.lengthscale_points = 1;
  s.variance_points = 7;
  s.refine_steps = 0;
  s.domain_diagonal = 6.0;
  const auto p = optimize_hyperparameters(data, SignFlipGroup::trivial(1), s);
  CHECK(p.variance == doctest::Approx(s.variance_lo));
}

TEST_CASE("single-candidate grid returns that candidate") {
  Eigen::MatrixXd X(2, 1);
  X << -1.0, 2.0;
  const Dataset data(X, Eigen::Vector2d(1.0, 3.0));
  SearchConfig s;
  s.lengthscale_points = 1;
  s.variance_points = 1;
  s.refine_steps = 0;
  s.domain_diagonal = 6.0;
  const auto p = optimize_hyperparameters(data, SignFlipGroup::trivial(1), s);
  CHECK(p.lengthscale == doctest::Approx(0.6));
  CHECK(p.variance == doctest::Approx(0.01 * 1.0));  // var(Y) = 1
}

TEST_CASE("fixed mode returns the configured values") {
  SearchConfig s;
  s.mode = SearchConfig::Mode::fixed;
  s.fixed = {0.37, 2.5};
  const Dataset data(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1));
  CHECK(optimize_hyperparameters(data, SignFlipGroup::trivial(1), s) == s.fixed);
}

TEST_CASE("MLL recovers the lengthscale of a GP draw") {
  std::mt19937_64 rng(27);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::normal_distribution<double> n01;
  const RbfParams truth{1.0, 1.0};
  Eigen::MatrixXd X(30, 1);
  for (auto& v : X.reshaped()) v = u(rng);
  Eigen::MatrixXd K = gram(X, KernelSpec{truth, SignFlipGroup::trivial(1)});
  K.diagonal().array() += 1e-10;
  Eigen::VectorXd z(30);
  for (auto& v : z) v = n01(rng);
  const Eigen::VectorXd Y = Eigen::LLT<Eigen::MatrixXd>(K).matrixL() * z;
  SearchConfig s;
  s.lengthscale_points = 20;
  s.variance_points = 20;
  s.domain_diagonal = 6.0;
  const auto p = optimize_hyperparameters(Dataset(X, Y), SignFlipGroup::trivial(1), s);
  CHECK(p.lengthscale > 0.5);
  CHECK(p.lengthscale < 2.0);
  // Deterministic
  CHECK(optimize_hyperparameters(Dataset(X, Y), SignFlipGroup::trivial(1), s) == p);
}

TEST_CASE("refinement never lowers the likelihood of the best grid point") {
  std::mt19937_64 rng(28);
  const auto data = smooth_data(12, 2, rng);
  SearchConfig s;
  s.domain_diagonal = std::sqrt(72.0);
  s.refine_steps = 0;
  const auto grid = optimize_hyperparameters(data, flips2(), s);
  s.refine_steps = 20;
  const auto refined = optimize_hyperparameters(data, flips2(), s);
  CHECK(log_marginal_likelihood({refined, flips2()}, data) >=
        log_marginal_likelihood({grid, flips2()}, data) - 1e-9);
}

}  // TEST_SUITE
