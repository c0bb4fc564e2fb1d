#include <doctest.h>

#include <cmath>

#include "teamquant/errors.hpp"
#include "teamquant/problems.hpp"

using namespace teamquant;

TEST_CASE("problem factories validate their specs") {
  CHECK_THROWS_AS(make_witsenhausen({0.0}), Error);
  CHECK_THROWS_AS(make_relay({1, {}}), Error);
  CHECK_THROWS_AS(make_relay({3, {0.1}}), Error);
  CHECK_THROWS_AS(make_relay({3, {0.1, -0.2}}), Error);
  CHECK_THROWS_AS(make_radner({0.0}), Error);
  CHECK(problem_name(RelaySpec{}) == "relay");
}

TEST_CASE("problem structure") {
  const auto w = make_witsenhausen({1.0});
  CHECK(w.num_agents == 2);
  CHECK(w.state_dim == 0);
  CHECK_FALSE(w.is_static);
  CHECK(w.kernels[1].gaussian->source == MeanSource::Agent);

  const auto r = make_relay({5, {0.1, 0.1, 0.1, 0.1}});
  CHECK(r.num_agents == 5);
  CHECK(r.kernels[0].gaussian->source == MeanSource::State);
  for (std::size_t i = 1; i < 5; ++i) CHECK(r.kernels[i].gaussian->agent == i - 1);

  const auto q = make_radner({0.1});
  CHECK(q.is_static);
  for (const auto& k : q.kernels) CHECK(k.gaussian->source == MeanSource::State);
}

TEST_CASE("zero policies") {
  const ContinuousPolicy zero2(2, [](double) { return 0.0; });
  const auto w = eval_cost_dynamic_mc(make_witsenhausen({2.5}), zero2, 300'000, 1, 4);
  CHECK(std::abs(w.mean - 2.5) < 3 * w.half_ci95);
  const auto q = eval_cost_dynamic_mc(make_radner({0.1}), zero2, 300'000, 2, 4);
  CHECK(std::abs(q.mean - 1.0) < 3 * q.half_ci95);
}

TEST_CASE("relay with linear policies matches the Gaussian moment expansion") {
  // E[(b(a(x + v0) + v1) - x)^2] = 2a^2b^2 - 2ab + b^2 + 1 for unit variances.
  const double a = 0.8, b = 0.45;
  const auto relay = make_relay({2, {0.0}});
  ContinuousPolicy linear{[a](double y) { return a * y; }, [b](double y) { return b * y; }};
  const auto est = eval_cost_dynamic_mc(relay, linear, 1'000'000, 3, 4);
  const double expected = 2 * a * a * b * b - 2 * a * b + b * b + 1;
  CHECK(std::abs(est.mean - expected) < 3 * est.half_ci95);
}

TEST_CASE("reduced and forward simulation agree for quantized-like policies") {
  const auto relay = make_relay({3, {0.1, 0.1}});
  const auto reduced = static_reduce(relay);
  ContinuousPolicy p{[](double y) { return std::floor(y); }, [](double y) { return y > 0.5 ? 1.0 : 0.0; },
                     [](double y) { return std::round(y * 2) / 4; }};
  const auto d = eval_cost_dynamic_mc(relay, p, 1'000'000, 4, 4);
  const auto r = eval_cost_reduced_mc(reduced, p, 1'000'000, 5, 4);
  CHECK(std::abs(d.mean - r.mean) <= 3 * (d.half_ci95 + r.half_ci95));
}

TEST_CASE("radner cost is positive") {
  const auto q = make_radner({0.1});
  const double x[1] = {0.3}, y[2] = {0.1, 0.2};
  for (double u1 = -3; u1 <= 3; u1 += 0.5) {
    for (double u2 = -3; u2 <= 3; u2 += 0.5) {
      const double u[2] = {u1, u2};
      CHECK(q.cost(x, y, u) >= 0.0);
    }
  }
}
