#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "photon_shaper/quadrature.hpp"

using namespace photon;
using C = std::complex<double>;

namespace {

std::vector<double> sample(std::size_t n, double h, double (*f)(double)) {
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = f(static_cast<double>(k) * h);
  return v;
}

double cubic(double t) { return 2.0 - t + 3.0 * t * t - 0.5 * t * t * t; }
double cubic_integral(double t) { return 2.0 * t - 0.5 * t * t + t * t * t - 0.125 * t * t * t * t; }

}  // namespace

class SmallRules : public ::testing::TestWithParam<std::size_t> {};

TEST_P(SmallRules, IntegrateCubicsExactly) {
  const std::size_t m = GetParam();
  const double h = 0.3;
  const auto v = sample(m, h, cubic);
  const double exact = cubic_integral(static_cast<double>(m - 1) * h);
  if (m == 2) {
    EXPECT_NEAR(quad::integrate(v, h), 0.5 * h * (v[0] + v[1]), 1e-14);
  } else {
    EXPECT_NEAR(quad::integrate(v, h), exact, 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(NodeCounts, SmallRules, ::testing::Values(2, 3, 4, 5, 6, 7, 9, 20, 101));

TEST(Quadrature, WeightsSumToLength) {
  for (std::size_t m = 2; m < 40; ++m) {
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) sum += quad::node_weight(k, m);
    EXPECT_NEAR(sum, static_cast<double>(m - 1), 1e-13) << "m = " << m;
  }
}

TEST(Quadrature, FourthOrderConvergence) {
  auto err = [](std::size_t n) {
    const double h = 2.0 / static_cast<double>(n - 1);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = std::exp(1.5 * static_cast<double>(k) * h);
    return std::abs(quad::integrate(v, h) - (std::exp(3.0) - 1.0) / 1.5);
  };
  const double ratio = err(41) / err(81);
  EXPECT_GT(ratio, 12.0);
  EXPECT_LT(ratio, 20.0);
}

TEST(Quadrature, CumulativeMatchesIntegrate) {
  const double h = 0.01;
  const auto v = sample(301, h, cubic);
  const auto cum = quad::cumulative(v, h);
  for (std::size_t j : {1u, 2u, 3u, 4u, 5u, 50u, 300u}) {
    EXPECT_NEAR(cum[j], quad::integrate(std::span<const double>(v.data(), j + 1), h), 1e-14);
  }
  EXPECT_NEAR(cum.back(), cubic_integral(3.0), 1e-11);
}

TEST(Quadrature, ExpWindowConvolveAgainstClosedForm) {
  // f = e^{i w t}, y(t) = (e^{i w t} - e^{a t}) / (i w - a)
  const C a(-0.5, -1.0);
  const double w = 0.7, h = 1e-3;
  const std::size_t n = 20001;
  std::vector<C> f(n);
  for (std::size_t k = 0; k < n; ++k) f[k] = std::exp(C(0.0, w * static_cast<double>(k) * h));
  const auto y = quad::exp_window_convolve(f, a, h);
  double err = 0.0;
  for (std::size_t j = 0; j < n; j += 97) {
    const double t = static_cast<double>(j) * h;
    const C exact = (std::exp(C(0.0, w * t)) - std::exp(a * t)) / (C(0.0, w) - a);
    err = std::max(err, std::abs(y[j] - exact));
  }
  EXPECT_LT(err, 1e-12);
}

TEST(Quadrature, DerivativeOrders) {
  const double h = 1e-2;
  std::vector<double> v(201);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = std::sin(static_cast<double>(k) * h);
  const auto d2 = quad::derivative(v, h);
  const auto d4 = quad::derivative4(v, h);
  double e2 = 0, e4 = 0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double exact = std::cos(static_cast<double>(k) * h);
    e2 = std::max(e2, std::abs(d2[k] - exact));
    e4 = std::max(e4, std::abs(d4[k] - exact));
  }
  EXPECT_LT(e2, 1e-4);
  EXPECT_LT(e4, 1e-8);
}
