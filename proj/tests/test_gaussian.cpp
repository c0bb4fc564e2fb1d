#include <doctest.h>

#include <cmath>
#include <random>

#include "teamquant/errors.hpp"
#include "teamquant/gaussian.hpp"
#include "teamquant/rng.hpp"

using namespace teamquant;

// Reference values from 30-digit mpmath (ncdf and quad of the truncated moments).
TEST_CASE("std_normal_cdf matches high-precision values") {
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK(std_normal_cdf(kInf) == 1.0);
  CHECK(std_normal_cdf(-kInf) == 0.0);
  const std::pair<double, double> table[] = {
      {1.0, 0.841344746068542948585},  {-1.0, 0.158655253931457051415},
      {-3.0, 0.00134989803163009452665}, {0.5, 0.691462461274013103638},
      {2.5, 0.993790334674223864833},  {6.0, 0.999999999013412354962},
      {-8.0, 6.22096057427178412352e-16}};
  for (auto [x, expected] : table) {
    CAPTURE(x);
    CHECK(std::abs(std_normal_cdf(x) - expected) <= 1e-14);
  }
}

TEST_CASE("std_normal_cdf is monotone and symmetric") {
  double prev = 0.0;
  for (double x = -40.0; x <= 40.0; x += 0.01) {
    const double p = std_normal_cdf(x);
    CHECK(p >= prev);
    prev = p;
    CHECK(std::abs(p + std_normal_cdf(-x) - 1.0) <= 1e-14);
  }
}

TEST_CASE("truncated moments of simple intervals") {
  const auto full = truncated_moments({-kInf, kInf});
  CHECK(full.mass == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(full.m1 == 0.0);
  CHECK(full.m2 == doctest::Approx(1.0).epsilon(1e-15));

  for (double a : {0.1, 1.0, 3.7, 12.0}) CHECK(truncated_moments({-a, a}).m1 == 0.0);

  const auto upper = truncated_moments({0.0, kInf});
  CHECK(std::abs(upper.mass - 0.5) < 1e-15);
  CHECK(std::abs(upper.m1 - 0.398942280401432677940) < 1e-15);
  CHECK(std::abs(upper.m2 - 0.5) < 1e-15);

  const auto mid = truncated_moments({1.0, 2.0});
  CHECK(std::abs(mid.mass - 0.135905121983277844214) < 1e-15);
  CHECK(std::abs(mid.m1 - 0.187979758005955297847) < 1e-15);
  CHECK(std::abs(mid.m2 - 0.269893913476045090111) < 1e-15);
}

TEST_CASE("half-line moments agree with sampling") {
  const auto draws = sample_normal(2024, 10'000'000, 4);
  double mass = 0, m1 = 0, m2 = 0;
  for (double y : draws) {
    if (y >= 0) {
      mass += 1;
      m1 += y;
      m2 += y * y;
    }
  }
  const double n = static_cast<double>(draws.size());
  const auto tm = truncated_moments({0.0, kInf});
  // 4 standard errors at 1e7 samples.
  CHECK(std::abs(mass / n - tm.mass) < 4 * 0.5 / std::sqrt(n));
  CHECK(std::abs(m1 / n - tm.m1) < 4 * 0.6 / std::sqrt(n));
  CHECK(std::abs(m2 / n - tm.m2) < 4 * 1.3 / std::sqrt(n));
}

TEST_CASE("truncated moments over random partitions") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> cut(-9.0, 9.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> edges{-kInf, kInf};
    const int pieces = 1 + trial % 40;
    for (int i = 0; i < pieces; ++i) edges.push_back(cut(gen));
    std::sort(edges.begin(), edges.end());
    double mass = 0, m1 = 0, m2 = 0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      const auto tm = truncated_moments({edges[i], edges[i + 1]});
      CHECK(tm.mass >= 0.0);
      CHECK(tm.m2 >= 0.0);
      mass += tm.mass;
      m1 += tm.m1;
      m2 += tm.m2;
    }
    CHECK(std::abs(mass - 1.0) < 1e-12);
    CHECK(std::abs(m1) < 1e-12);
    CHECK(std::abs(m2 - 1.0) < 1e-12);

    // Abutting intervals are additive.
    const double a = edges[1], b = edges[edges.size() / 2], c = edges[edges.size() - 2];
    if (a < b && b < c) {
      const auto left = truncated_moments({a, b}), right = truncated_moments({b, c});
      const auto both = truncated_moments({a, c});
      CHECK(std::abs(left.mass + right.mass - both.mass) < 1e-12);
      CHECK(std::abs(left.m1 + right.m1 - both.m1) < 1e-12);
      CHECK(std::abs(left.m2 + right.m2 - both.m2) < 1e-12);
    }
  }
}

TEST_CASE("gauss_expect integrates polynomials exactly") {
  CHECK(gauss_expect([](double) { return 1.0; }, 1) == doctest::Approx(1.0).epsilon(1e-15));
  for (std::size_t n : {2u, 3u, 10u, 64u, 200u}) {
    CAPTURE(n);
    CHECK(std::abs(gauss_expect([](double y) { return y * y; }, n) - 1.0) < 1e-12);
    CHECK(std::abs(gauss_expect([](double y) { return y; }, n)) < 1e-12);
  }
  // E[Y^6] = 15, degree 6 <= 2*4 - 1.
  CHECK(std::abs(gauss_expect([](double y) { return std::pow(y, 6); }, 4) - 15.0) < 1e-11);
  // E[Y^8] = 105 needs 5 nodes; 4 nodes are not exact.
  CHECK(std::abs(gauss_expect([](double y) { return std::pow(y, 8); }, 4) - 105.0) > 1.0);
}

TEST_CASE("gauss_expect converges to the moment generating function") {
  const double target = std::exp(0.5);
  double prev_err = 1.0;
  for (std::size_t n : {2u, 4u, 8u, 16u}) {
    const double err = std::abs(gauss_expect([](double y) { return std::exp(y); }, n) - target);
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err < 1e-13);
}

TEST_CASE("gauss_expect rejects non-finite integrands") {
  CHECK_THROWS_AS(gauss_expect([](double y) { return y > 0 ? kInf : 0.0; }, 8), Error);
  try {
    gauss_expect([](double) { return std::nan(""); }, 3);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteValue);
  }
  CHECK_THROWS_AS(gauss_hermite(0), Error);
}

TEST_CASE("sample_normal is deterministic and standard") {
  const auto a = sample_normal(11, 1'000'000, 1);
  const auto b = sample_normal(11, 1'000'000, 8);
  CHECK(a == b);
  CHECK(sample_normal(12, 10, 1) != sample_normal(11, 10, 1));
  double mean = 0, sq = 0;
  for (double y : a) {
    mean += y;
    sq += y * y;
  }
  mean /= a.size();
  const double var = sq / a.size() - mean * mean;
  CHECK(std::abs(mean) < 0.005);
  CHECK(std::abs(var - 1.0) < 0.006);
}
