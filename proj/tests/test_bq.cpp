#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "invbq/bq.hpp"
#include "invbq/errors.hpp"
#include "invbq/testbed.hpp"
#include "support/oracles.hpp"

using namespace invbq;

namespace {

SignFlipGroup flips2() {
  return SignFlipGroup::from_generators({SignVector({-1, 1}), SignVector({1, -1})}, 2);
}

BqState make_state(const KernelSpec& spec, const Measure& m, const Dataset& data) {
  return BqState(GpPosterior::fit(spec, data), build_embedding_table(m, spec.params, spec.group));
}

Dataset sample_data(const Measure& m, std::size_t n, std::uint64_t seed,
                    const std::function<double(const Eigen::VectorXd&)>& f) {
  const Eigen::MatrixXd X = initial_design(m, n, seed);
  Eigen::VectorXd Y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) Y[i] = f(X.row(i).transpose());
  return Dataset(X, Y);
}

double bump(const Eigen::VectorXd& x) { return std::exp(-0.5 * x.squaredNorm()) * (1.0 + 0.3 * std::cos(2.0 * x[0])); }

}  // namespace

TEST_SUITE("bq") {

TEST_CASE("prior integral with no data") {
  const auto m = Measure::centered_box(2, 3.0);
  const KernelSpec spec{{1.2, 0.9}, flips2()};
  const auto state = make_state(spec, m, Dataset(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)));
  CHECK(state.integral().mean == 0.0);
  CHECK(state.integral().variance == doctest::Approx(state.table().prior_variance_sum()).epsilon(1e-15));
}

TEST_CASE("single observation with the standard kernel") {
  const auto m = Measure::box(Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 2.0));
  const KernelSpec spec{{1.7, 0.6}, SignFlipGroup::trivial(1)};
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.4);
  const auto gp = GpPosterior::fit(spec, Dataset(x.transpose(), Eigen::VectorXd::Constant(1, 2.5)));
  const auto table = build_embedding_table(m, spec.params, spec.group);
  const auto post = bq_posterior(gp, table);
  CHECK(post.mean == doctest::Approx(kernel_mean_base(m, spec.params, x) * 2.5 / (1.7 + gp.jitter_used()))
                         .epsilon(1e-14));
}

TEST_CASE("kernel mismatch between GP and table") {
  const auto m = Measure::centered_box(1, 3.0);
  const KernelSpec spec{{1.0, 1.0}, SignFlipGroup::point_symmetry(1)};
  const auto gp = GpPosterior::fit(spec, Dataset(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1)));
  CHECK_THROWS_AS(bq_posterior(gp, build_embedding_table(m, {1.0, 2.0}, spec.group)), ConfigError);
  CHECK_THROWS_AS(bq_posterior(gp, build_embedding_table(m, spec.params, SignFlipGroup::trivial(1))),
                  ConfigError);
}

TEST_CASE("integral posterior matches quadrature of the GP posterior (1D)") {
  const auto m = Measure::centered_box(1, 3.0);
  const auto data = sample_data(m, 3, 41, bump);
  for (const auto& group : {SignFlipGroup::trivial(1), SignFlipGroup::point_symmetry(1)}) {
    const KernelSpec spec{{1.0, 0.8}, group};
    const auto state = make_state(spec, m, data);
    CHECK(oracle::rel_err(state.integral().mean, oracle::posterior_mean_integral(state.gp(), m, 1e-11)) < 1e-6);
    CHECK(oracle::rel_err(state.integral().variance,
                          oracle::posterior_variance_integral_1d(state.gp(), m, 1e-10)) < 1e-6);
  }
}

TEST_CASE("integral mean matches quadrature of the GP posterior mean (2D)") {
  const auto m = Measure::centered_box(2, 3.0);
  const auto data = sample_data(m, 5, 42, bump);
  const KernelSpec spec{{1.0, 1.1}, SignFlipGroup::point_symmetry(2)};
  const auto state = make_state(spec, m, data);
  CHECK(oracle::rel_err(state.integral().mean, oracle::posterior_mean_integral(state.gp(), m, 1e-10)) < 1e-6);
}

TEST_CASE("relabeling orbit-equivalent observations leaves the posterior unchanged") {
  const auto m = Measure::gaussian(Eigen::VectorXd::Ones(2), 1.0);
  auto data = sample_data(m, 6, 43, bump);
  const KernelSpec spec{{1.0, 1.0}, flips2()};
  const auto a = make_state(spec, m, data).integral();
  for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
    data.X.row(i) = apply(spec.group.element(static_cast<std::size_t>(i) % 4), data.X.row(i).transpose()).transpose();
  }
  const auto b = make_state(spec, m, data).integral();
  CHECK(std::abs(a.mean - b.mean) <= 1e-8 * std::abs(a.mean));
  CHECK(std::abs(a.variance - b.variance) <= 1e-8 * a.variance + 1e-12);
}

TEST_CASE("IVR") {
  const auto m = Measure::centered_box(2, 3.0);
  const KernelSpec spec{{1.0, 0.9}, flips2()};
  const auto data = sample_data(m, 6, 44, bump);
  const auto state = make_state(spec, m, data);

  SUBCASE("no information at observed points") {
    for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
      CHECK(acquisition_ivr(data.X.row(i).transpose(), state) < 1e-6 * state.integral().variance);
    }
  }
  SUBCASE("invariant under the group") {
    std::mt19937_64 rng(45);
    const auto X = oracle::random_points(m, 30, rng);
    for (Eigen::Index n = 0; n < X.rows(); ++n) {
      const Eigen::VectorXd x = X.row(n).transpose();
      const double a = acquisition_ivr(x, state);
      CHECK(a >= 0.0);
      for (const auto& g : spec.group.elements()) {
        CHECK(std::abs(acquisition_ivr(apply(g, x), state) - a) <= 1e-8 * (a + 1e-12));
      }
    }
  }
  SUBCASE("one-step reduction identity") {
    const Eigen::VectorXd x = select_next(state, 1, 200);
    const double a = acquisition_ivr(x, state);
    auto bigger = data;
    bigger.append(x, bump(x));
    const auto after = make_state(spec, m, bigger);
    CHECK(std::abs((state.integral().variance - after.integral().variance) - a) < 1e-8);
  }
  SUBCASE("outside the domain") {
    CHECK_THROWS_AS(acquisition_ivr(Eigen::Vector2d(3.5, 0.0), state), InvalidInput);
    CHECK_THROWS_AS(acquisition_ivr(Eigen::VectorXd::Zero(1), state), InvalidInput);
  }
}

TEST_CASE("select_next") {
  const auto m = Measure::centered_box(2, 3.0);
  const KernelSpec spec{{1.0, 0.9}, SignFlipGroup::point_symmetry(2)};
  const auto data = sample_data(m, 4, 46, bump);
  const auto state = make_state(spec, m, data);

  SUBCASE("one candidate without refinement returns that candidate") {
    std::mt19937_64 rng(9);
    Eigen::VectorXd expected(2);
    for (Eigen::Index q = 0; q < 2; ++q) expected[q] = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    CHECK(select_next(state, 9, 1, 0) == expected);
  }
  SUBCASE("deterministic") {
    CHECK(select_next(state, 77, 100) == select_next(state, 77, 100));
  }
  SUBCASE("never returns an observed point or an orbit image") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Eigen::VectorXd x = select_next(state, seed, 50);
      CHECK(m.contains(x));
      for (Eigen::Index i = 0; i < data.X.rows(); ++i) {
        for (const auto& p : spec.group.orbit(data.X.row(i).transpose())) CHECK((x - p).norm() > 1e-9);
      }
    }
  }
  CHECK_THROWS_AS(select_next(state, 0, 0), InvalidInput);
}

TEST_CASE("active loop") {
  const auto desc = testbed::find("hennig1d");
  const auto f = testbed::make_integrand(desc);
  const auto m = desc.default_domain;

  SUBCASE("no active steps when n_total == n_initial") {
    ActiveConfig c;
    c.group = SignFlipGroup::point_symmetry(1);
    c.n_initial = 5;
    c.n_total = 5;
    c.hyper.lengthscale_points = c.hyper.variance_points = 8;
    const auto s = run_active_bq(f, m, c);
    CHECK(s.history().size() == 1);
    CHECK(s.gp().size() == 5);
  }
  SUBCASE("error shrinks and the run is deterministic") {
    ActiveConfig c;
    c.group = SignFlipGroup::point_symmetry(1);
    c.n_total = 20;
    c.seed = 3;
    c.hyper.lengthscale_points = c.hyper.variance_points = 12;
    c.n_candidates = 200;
    const auto a = run_active_bq(f, m, c);
    const auto b = run_active_bq(f, m, c);
    REQUIRE(a.history().size() == 16);
    const double ref = oracle::kHennig1dBox3;
    CHECK(std::abs(a.history().back().mean - ref) < std::abs(a.history().front().mean - ref));
    for (std::size_t k = 0; k < a.history().size(); ++k) {
      CHECK(a.history()[k].n == 5 + k);
      CHECK(a.history()[k].mean == b.history()[k].mean);
      CHECK(a.history()[k].variance == b.history()[k].variance);
    }
    CHECK(a.gp().data().X == b.gp().data().X);
  }
  SUBCASE("variance never increases with fixed hyperparameters") {
    ActiveConfig c;
    c.group = SignFlipGroup::point_symmetry(1);
    c.n_total = 15;
    c.hyper.mode = SearchConfig::Mode::fixed;
    c.hyper.fixed = {0.5, 0.7};
    c.n_candidates = 100;
    const auto s = run_active_bq(f, m, c);
    for (std::size_t k = 1; k < s.history().size(); ++k) {
      CHECK(s.history()[k].variance <= s.history()[k - 1].variance + 1e-10);
    }
  }
  SUBCASE("trivial group equals standard BQ bit for bit") {
    ActiveConfig c;
    c.group = SignFlipGroup::trivial(1);
    c.n_total = 9;
    c.hyper.lengthscale_points = c.hyper.variance_points = 6;
    const auto a = run_active_bq(f, m, c);
    c.group = SignFlipGroup::from_generators({}, 1);
    const auto b = run_active_bq(f, m, c);
    CHECK(a.integral().mean == b.integral().mean);
    CHECK(a.integral().variance == b.integral().variance);
  }
  SUBCASE("non-finite integrand values abort with the point") {
    Integrand bad{[](const Eigen::VectorXd& x) { return x[0] > 0.0 ? std::nan("") : 1.0; }, 1,
                  SignFlipGroup::trivial(1)};
    ActiveConfig c;
    c.group = SignFlipGroup::trivial(1);
    c.n_total = 10;
    try {
      run_active_bq(bad, m, c);
      FAIL("expected IntegrandError");
    } catch (const IntegrandError& e) {
      CHECK(std::string(e.what()).find(" at (") != std::string::npos);
    }
  }
  SUBCASE("invalid configs") {
    ActiveConfig c;
    c.group = SignFlipGroup::trivial(1);
    c.n_initial = 0;
    CHECK_THROWS_AS(run_active_bq(f, m, c), InvalidInput);
    c.n_initial = 6;
    c.n_total = 5;
    CHECK_THROWS_AS(run_active_bq(f, m, c), InvalidInput);
  }
}

TEST_CASE("initial design is shared and follows the measure") {
  const auto box = Measure::centered_box(2, 3.0);
  const auto X = initial_design(box, 50, 8);
  CHECK(X == initial_design(box, 50, 8));
  CHECK(X.topRows(5) == initial_design(box, 5, 8));
  for (Eigen::Index i = 0; i < X.rows(); ++i) CHECK(box.contains(X.row(i).transpose()));
  const auto g = Measure::gaussian(Eigen::VectorXd::Ones(2), 1.0);
  const auto G = initial_design(g, 4000, 8);
  CHECK(G.colwise().mean()(0) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("Monte Carlo") {
  SUBCASE("constant integrand") {
    Integrand one{[](const Eigen::VectorXd&) { return 1.0; }, 2, SignFlipGroup::trivial(2)};
    const auto est = mc_estimate(one, Measure::box(Eigen::Vector2d::Zero(), Eigen::Vector2d::Ones()), 100, 1);
    CHECK(est.estimate == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(est.stderr_ == 0.0);
  }
  SUBCASE("odd integrand on a symmetric interval") {
    Integrand id{[](const Eigen::VectorXd& x) { return x[0]; }, 1, SignFlipGroup::trivial(1)};
    const auto est = mc_estimate(id, Measure::centered_box(1, 1.0), 10000, 2);
    CHECK(std::abs(est.estimate) < 5.0 * est.stderr_);
  }
  SUBCASE("trace agrees with single estimates") {
    const auto f = testbed::make_integrand(testbed::find("hennig1d"));
    const auto m = Measure::centered_box(1, 3.0);
    const auto trace = mc_trace(f, m, 2, 50, 4);
    REQUIRE(trace.size() == 49);
    const auto last = mc_estimate(f, m, 50, 4);
    CHECK(trace.back().estimate == doctest::Approx(last.estimate).epsilon(1e-13));
    CHECK(trace.back().stderr_ == doctest::Approx(last.stderr_).epsilon(1e-12));
  }
  SUBCASE("errors") {
    Integrand one{[](const Eigen::VectorXd&) { return 1.0; }, 1, SignFlipGroup::trivial(1)};
    CHECK_THROWS_AS(mc_estimate(one, Measure::centered_box(1, 1.0), 1, 0), InvalidInput);
    Integrand nan{[](const Eigen::VectorXd&) { return std::nan(""); }, 1, SignFlipGroup::trivial(1)};
    CHECK_THROWS_AS(mc_estimate(nan, Measure::centered_box(1, 1.0), 10, 0), IntegrandError);
  }
}

TEST_CASE("integral variance stays non-negative on ill-conditioned designs") {
  set_warning_handler(nullptr);
  const auto m = Measure::centered_box(1, 1.0);
  Eigen::MatrixXd X(40, 1);
  for (Eigen::Index i = 0; i < 40; ++i) X(i, 0) = -1.0 + 2.0 * static_cast<double>(i) / 39.0;
  const KernelSpec spec{{1.0, 3.0}, SignFlipGroup::point_symmetry(1)};
  const auto state = make_state(spec, m, Dataset(X, Eigen::VectorXd::Ones(40)));
  CHECK(state.integral().variance >= 0.0);
  CHECK(std::isfinite(state.integral().mean));
}

}  // TEST_SUITE
