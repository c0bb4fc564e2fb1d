#include <doctest.h>

#include <cmath>
#include <random>

#include "teamquant/errors.hpp"
#include "teamquant/gaussian.hpp"
#include "teamquant/problems.hpp"
#include "teamquant/team_model.hpp"

using namespace teamquant;

namespace {

ContinuousPolicy constant_policy(std::size_t n, double value = 0.0) {
  return ContinuousPolicy(n, [value](double) { return value; });
}

// Both estimators target the same integral: allow 3 combined half-widths.
void check_consistent(const McEstimate& a, const McEstimate& b) {
  CHECK(std::abs(a.mean - b.mean) <= 3.0 * (a.half_ci95 + b.half_ci95));
}

}  // namespace

TEST_CASE("gaussian density factor") {
  for (double y : {-3.0, 0.0, 0.4, 17.0}) CHECK(gaussian_density_factor(0.0, y) == 1.0);
  CHECK(std::abs(gaussian_density_factor(1.0, 1.0) - 1.64872127070012814685) < 1e-15);
  CHECK(std::abs(gaussian_density_factor(0.7, -0.3) * std_normal_pdf(-0.3) -
                 std_normal_pdf(-1.0)) < 1e-14);
  for (double u = -3.0; u <= 3.0; u += 0.05) {
    for (double y = -3.0; y <= 3.0; y += 0.05) {
      CHECK(std::abs(gaussian_density_factor(u, y) * std_normal_pdf(y) - std_normal_pdf(y - u)) <
            1e-14);
    }
  }
  try {
    gaussian_density_factor(1000.0, 1000.0);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Overflow);
  }
}

TEST_CASE("static reduction of Witsenhausen reproduces the reduced cost") {
  const double weight = 0.37;
  const auto reduced = static_reduce(make_witsenhausen({weight}));
  std::mt19937_64 gen(1);
  std::normal_distribution<double> d(0.0, 1.5);
  for (int i = 0; i < 500; ++i) {
    const double y[2] = {d(gen), d(gen)};
    const double u[2] = {d(gen), d(gen)};
    const double expected = (weight * (u[0] - y[0]) * (u[0] - y[0]) + (u[1] - u[0]) * (u[1] - u[0])) *
                            std::exp(-(u[0] * u[0] - 2.0 * y[1] * u[0]) / 2.0);
    CHECK(reduced.reduced_cost({}, y, u) == doctest::Approx(expected).epsilon(1e-13));
    const double u0[2] = {0.0, u[1]};
    CHECK(reduced.reduced_cost({}, y, u0) ==
          doctest::Approx(weight * y[0] * y[0] + u[1] * u[1]).epsilon(1e-14));
  }
}

TEST_CASE("static reduction of the relay multiplies chain densities") {
  const RelaySpec spec{4, {0.1, 0.2, 0.3}};
  const auto problem = make_relay(spec);
  const auto reduced = static_reduce(problem);
  std::mt19937_64 gen(2);
  std::normal_distribution<double> d(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double x[1] = {d(gen)};
    double y[4], u[4];
    for (int k = 0; k < 4; ++k) {
      y[k] = d(gen);
      u[k] = d(gen);
    }
    double c = (u[3] - x[0]) * (u[3] - x[0]);
    for (int k = 0; k < 3; ++k) c += spec.weights[k] * u[k] * u[k];
    double density = gaussian_density_factor(x[0], y[0]);
    for (int k = 1; k < 4; ++k) density *= gaussian_density_factor(u[k - 1], y[k]);
    CHECK(reduced.reduced_cost(x, y, u) == doctest::Approx(c * density).epsilon(1e-13));
    CHECK(problem.cost(x, y, u) >= 0.0);
  }
}

TEST_CASE("static reduction rejects unsupported kernels") {
  auto problem = make_witsenhausen({1.0});
  problem.kernels[1].gaussian->noise_sd = 2.0;
  CHECK_THROWS_AS(static_reduce(problem), Error);

  problem = make_witsenhausen({1.0});
  problem.kernels[1].gaussian.reset();
  try {
    static_reduce(problem);
    FAIL("expected UnsupportedKernel");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedKernel);
  }

  RelaySpec noisy{3, {0.1, 0.1}, 1.0, 0.5};
  CHECK_THROWS_AS(static_reduce(make_relay(noisy)), Error);
}

TEST_CASE("stage costs sum to the team cost") {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> d(0.0, 2.0);
  for (const ProblemSpec& spec :
       {ProblemSpec{WitsenhausenSpec{0.3}}, ProblemSpec{RelaySpec{3, {0.1, 0.4}}},
        ProblemSpec{RadnerSpec{0.1}}}) {
    const auto p = make_problem(spec);
    REQUIRE(p.stage_costs.size() == p.num_agents);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> x(p.state_dim), y(p.num_agents), u(p.num_agents);
      for (auto& v : x) v = d(gen);
      for (auto& v : y) v = d(gen);
      for (auto& v : u) v = d(gen);
      double sum = 0.0;
      for (std::size_t i = 0; i < p.num_agents; ++i) {
        sum += p.stage_costs[i](x.empty() ? 0.0 : x[0], y[i], i ? u[i - 1] : 0.0, u[i]);
      }
      CHECK(sum == doctest::Approx(p.cost(x, y, u)).epsilon(1e-12));
    }
  }
}

TEST_CASE("dynamic Monte Carlo on simple policies") {
  const double weight = 0.6;
  const auto wits = make_witsenhausen({weight});
  const auto zero = eval_cost_dynamic_mc(wits, constant_policy(2), 400'000, 1, 4);
  CHECK(std::abs(zero.mean - weight) < 3 * zero.half_ci95);

  ContinuousPolicy identity{[](double y) { return y; }, [](double) { return 0.0; }};
  const auto ident = eval_cost_dynamic_mc(wits, identity, 400'000, 2, 4);
  CHECK(std::abs(ident.mean - 1.0) < 3 * ident.half_ci95);

  const auto relay = make_relay({3, {0.1, 0.1}});
  const auto rz = eval_cost_dynamic_mc(relay, constant_policy(3), 400'000, 3, 4);
  CHECK(std::abs(rz.mean - 1.0) < 3 * rz.half_ci95);

  CHECK_THROWS_AS(eval_cost_dynamic_mc(wits, constant_policy(2), 1, 1), Error);
  CHECK_THROWS_AS(eval_cost_dynamic_mc(wits, constant_policy(3), 10, 1), Error);
  ContinuousPolicy blowup{[](double) { return kInf; }, [](double) { return 0.0; }};
  try {
    eval_cost_dynamic_mc(wits, blowup, 100, 1);
    FAIL("expected NonFiniteCost");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteCost);
  }
}

TEST_CASE("Monte Carlo does not depend on thread count") {
  const auto wits = make_witsenhausen({1.0});
  ContinuousPolicy p{[](double y) { return y > 0 ? 1.0 : -1.0; }, [](double y) { return 0.5 * y; }};
  const auto a = eval_cost_dynamic_mc(wits, p, 100'003, 42, 1);
  const auto b = eval_cost_dynamic_mc(wits, p, 100'003, 42, 7);
  CHECK(a.mean == b.mean);
  CHECK(a.half_ci95 == b.half_ci95);
  const auto reduced = static_reduce(wits);
  CHECK(eval_cost_reduced_mc(reduced, p, 50'000, 3, 1).mean ==
        eval_cost_reduced_mc(reduced, p, 50'000, 3, 5).mean);
}

TEST_CASE("reduced Monte Carlo agrees with forward simulation") {
  const double weight = 0.6;
  const auto wits = make_witsenhausen({weight});
  const auto reduced = static_reduce(wits);
  const auto zero = eval_cost_reduced_mc(reduced, constant_policy(2), 400'000, 5, 4);
  CHECK(std::abs(zero.mean - weight) < 3 * zero.half_ci95);

  ContinuousPolicy identity{[](double y) { return y; }, [](double) { return 0.0; }};
  const auto dyn = eval_cost_dynamic_mc(wits, identity, 1'000'000, 6, 4);
  const auto red = eval_cost_reduced_mc(reduced, identity, 1'000'000, 7, 4);
  check_consistent(dyn, red);
  CHECK(std::abs(red.mean - 1.0) < 3 * red.half_ci95);

  ContinuousPolicy step{[](double y) { return y >= 0 ? 0.8 : -0.8; },
                        [](double y) { return y >= 0 ? 0.6 : -0.6; }};
  check_consistent(eval_cost_dynamic_mc(wits, step, 1'000'000, 8, 4),
                   eval_cost_reduced_mc(reduced, step, 1'000'000, 9, 4));
}

TEST_CASE("reduced coordinates are uncorrelated") {
  auto reduced = static_reduce(make_witsenhausen({1.0}));
  // With u = 0 all density factors are 1, so E[(y1 + y2)^2] = 2 + 2 corr.
  reduced.problem.cost = [](std::span<const double>, std::span<const double> y,
                            std::span<const double>) { return (y[0] + y[1]) * (y[0] + y[1]); };
  const auto est = eval_cost_reduced_mc(reduced, constant_policy(2), 1'000'000, 10, 4);
  CHECK(std::abs((est.mean - 2.0) / 2.0) < 0.01);
}
