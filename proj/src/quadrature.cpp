#include "invbq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "invbq/errors.hpp"

namespace invbq::quad {

namespace {

constexpr double kInnerTolFloor = 1e-12;
constexpr double kMinRelTol = 1e-15;

struct Estimate {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

Estimate gk15(const std::function<double(double)>& f, double a, double b, const Options& opt) {
  Estimate e;
  // Boost's stopping test is per panel, so its summed error estimate can land
  // just above the requested tolerance; ask for half and check the full one.
  e.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, opt.max_depth, 0.5 * opt.rel_tol, &e.error, &e.l1);
  return e;
}

double checked(const Estimate& e, double a, double b, const Options& opt) {
  if (!std::isfinite(e.value) || e.error > opt.rel_tol * e.l1 + 1e-300) {
    std::ostringstream msg;
    msg.precision(3);
    msg << "quadrature on [" << a << ", " << b << "] did not converge: error estimate " << e.error
        << " vs tolerance " << opt.rel_tol * e.l1;
    throw OracleFailure(msg.str());
  }
  return e.value;
}

// Integrates over the pieces of [a, b] cut at the interior breakpoints and
// checks the summed error against the whole interval. A narrow peak sitting
// inside a wide interval is otherwise easy to undersample.
double integrate_pieces(const std::function<double(double)>& f, double a, double b,
                        std::vector<double> cuts, const Options& opt) {
  if (!(opt.rel_tol >= kMinRelTol)) {
    std::ostringstream msg;
    msg << "quadrature tolerance " << opt.rel_tol << " is below what double precision can certify ("
        << kMinRelTol << ")";
    throw OracleFailure(msg.str());
  }
  if (!(a < b)) {
    if (a == b) return 0.0;
    return -integrate_pieces(f, b, a, std::move(cuts), opt);
  }
  std::sort(cuts.begin(), cuts.end());
  Estimate total;
  double left = a;
  auto add = [&](double lo, double hi) {
    const Estimate e = gk15(f, lo, hi, opt);
    total.value += e.value;
    total.error += e.error;
    total.l1 += e.l1;
  };
  for (double c : cuts) {
    if (c <= left || c >= b) continue;
    add(left, c);
    left = c;
  }
  add(left, b);
  return checked(total, a, b, opt);
}

}  // namespace

double integrate_1d(const std::function<double(double)>& f, double a, double b,
                    const Options& opt) {
  return integrate_pieces(f, a, b, {}, opt);
}

namespace {

std::vector<double> axis_cuts(const std::vector<Eigen::VectorXd>& peaks, Eigen::Index q) {
  std::vector<double> cuts;
  for (const auto& p : peaks) cuts.push_back(p[q]);
  return cuts;
}

}  // namespace

double integrate_box(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                     const Options& opt) {
  return integrate_box(f, lower, upper, {}, opt);
}

double integrate_box(const std::function<double(const Eigen::VectorXd&)>& f,
                     const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                     const std::vector<Eigen::VectorXd>& peaks, const Options& opt) {
  if (lower.size() != upper.size()) throw InvalidInput("integrate_box: bound size mismatch");
  for (const auto& p : peaks) {
    if (p.size() != lower.size()) throw InvalidInput("integrate_box: peak dimension mismatch");
  }
  if (lower.size() == 1) {
    Eigen::VectorXd x(1);
    return integrate_pieces([&](double t) { x[0] = t; return f(x); }, lower[0], upper[0],
                            axis_cuts(peaks, 0), opt);
  }
  if (lower.size() == 2) {
    // Inner integrals run at a tighter tolerance so their error does not
    // dominate the outer estimate, but not below 1e-12: past that the
    // Kronrod error estimate sits on rounding noise and never converges.
    Options inner = opt;
    inner.rel_tol = std::max(opt.rel_tol * 0.1, kInnerTolFloor);
    auto outer = [&](double s) {
      Eigen::VectorXd x(2);
      x[0] = s;
      return integrate_pieces([&](double t) { x[1] = t; return f(x); }, lower[1], upper[1],
                              axis_cuts(peaks, 1), inner);
    };
    return integrate_pieces(outer, lower[0], upper[0], axis_cuts(peaks, 0), opt);
  }
  throw InvalidInput("integrate_box supports dimension 1 or 2, got " +
                     std::to_string(lower.size()));
}

double integrate_measure(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Measure& measure, const Options& opt) {
  return integrate_measure(f, measure, {}, opt);
}

double integrate_measure(const std::function<double(const Eigen::VectorXd&)>& f,
                         const Measure& measure, std::vector<Eigen::VectorXd> peaks,
                         const Options& opt) {
  if (measure.is_box()) {
    const auto& box = measure.as_box();
    return integrate_box(f, box.lower, box.upper, peaks, opt);
  }
  const auto& g = measure.as_gaussian();
  const double r = kGaussianTruncation * std::sqrt(g.variance);
  peaks.push_back(g.mean);
  return integrate_box([&](const Eigen::VectorXd& x) { return f(x) * measure.density(x); },
                       g.mean.array() - r, g.mean.array() + r, peaks, opt);
}

double kernel_mean(const Measure& measure, const RbfParams& params, const SignVector& c,
                   const Eigen::VectorXd& x, const Options& opt) {
  const Eigen::VectorXd cx = apply(c, x);
  return integrate_measure([&](const Eigen::VectorXd& s) { return rbf(s, cx, params); }, measure,
                           {cx}, opt);
}

namespace {

struct Interval {
  double lo;
  double hi;
};

}  // namespace

double prior_variance(const Measure& measure, const RbfParams& params, const SignVector& c,
                      const Options& opt) {
  if (c.dim() != measure.dim()) throw InvalidInput("prior_variance: dimension mismatch");
  const double l2 = params.lengthscale * params.lengthscale;
  Options inner = opt;
  inner.rel_tol = std::max(opt.rel_tol * 0.1, kInnerTolFloor);
  double prod = params.variance;
  for (std::size_t q = 0; q < c.dim(); ++q) {
    const auto qi = static_cast<Eigen::Index>(q);
    const double sign = static_cast<double>(c[q]);
    Interval range{};
    std::vector<double> centre;
    std::function<double(double)> density;
    if (measure.is_box()) {
      range = {measure.as_box().lower[qi], measure.as_box().upper[qi]};
      density = [](double) { return 1.0; };
    } else {
      const auto& g = measure.as_gaussian();
      const double sd = std::sqrt(g.variance);
      const double m = g.mean[qi];
      range = {m - kGaussianTruncation * sd, m + kGaussianTruncation * sd};
      centre = {m};
      density = [m, v = g.variance](double t) {
        return std::exp(-(t - m) * (t - m) / (2.0 * v)) / std::sqrt(2.0 * std::numbers::pi * v);
      };
    }
    auto outer = [&](double s) {
      const double cs = sign * s;
      auto cuts = centre;
      cuts.push_back(cs);
      return density(s) * integrate_pieces(
                              [&](double t) {
                                return std::exp(-(cs - t) * (cs - t) / (2.0 * l2)) * density(t);
                              },
                              range.lo, range.hi, cuts, inner);
    };
    prod *= integrate_pieces(outer, range.lo, range.hi, centre, opt);
  }
  return prod;
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<std::size_t>(n), 0.0);
  w.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>(n - 1 - i);
    x[a] = -z;
    x[b] = z;
    w[a] = w[b] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

}  // namespace

TensorRule gauss_legendre_box(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                              int panels, int order) {
  if (panels < 1 || order < 1) throw InvalidInput("tensor rule: panels and order must be >= 1");
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);
  const auto d = lower.size();
  const Eigen::Index per_dim = static_cast<Eigen::Index>(panels) * order;
  // 1D rules per dimension
  std::vector<Eigen::VectorXd> nodes(static_cast<std::size_t>(d)), weights(static_cast<std::size_t>(d));
  for (Eigen::Index q = 0; q < d; ++q) {
    auto& nq = nodes[static_cast<std::size_t>(q)];
    auto& wq = weights[static_cast<std::size_t>(q)];
    nq.resize(per_dim);
    wq.resize(per_dim);
    const double h = (upper[q] - lower[q]) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = lower[q] + (p + 0.5) * h;
      for (int k = 0; k < order; ++k) {
        const Eigen::Index idx = static_cast<Eigen::Index>(p) * order + k;
        nq[idx] = mid + 0.5 * h * gx[static_cast<std::size_t>(k)];
        wq[idx] = 0.5 * h * gw[static_cast<std::size_t>(k)];
      }
    }
  }
  Eigen::Index total = 1;
  for (Eigen::Index q = 0; q < d; ++q) total *= per_dim;
  TensorRule rule{Eigen::MatrixXd(total, d), Eigen::VectorXd(total)};
  for (Eigen::Index m = 0; m < total; ++m) {
    Eigen::Index rem = m;
    double w = 1.0;
    for (Eigen::Index q = 0; q < d; ++q) {
      const Eigen::Index k = rem % per_dim;
      rem /= per_dim;
      rule.nodes(m, q) = nodes[static_cast<std::size_t>(q)][k];
      w *= weights[static_cast<std::size_t>(q)][k];
    }
    rule.weights[m] = w;
  }
  return rule;
}

TensorRule gauss_legendre_measure(const Measure& measure, int panels, int order) {
  if (measure.is_box()) {
    return gauss_legendre_box(measure.as_box().lower, measure.as_box().upper, panels, order);
  }
  const auto& g = measure.as_gaussian();
  const double r = kGaussianTruncation * std::sqrt(g.variance);
  TensorRule rule = gauss_legendre_box(g.mean.array() - r, g.mean.array() + r, panels, order);
  for (Eigen::Index m = 0; m < rule.weights.size(); ++m) {
    rule.weights[m] *= measure.density(rule.nodes.row(m).transpose());
  }
  return rule;
}

}  // namespace invbq::quad
