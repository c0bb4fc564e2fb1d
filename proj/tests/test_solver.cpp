#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "teamquant/errors.hpp"
#include "teamquant/problems.hpp"
#include "teamquant/solver.hpp"

using namespace teamquant;
using teamquant::testing::brute_force_cost;

namespace {

FiniteTeamModel model(const ProblemSpec& spec, double radius, std::size_t n, double m,
                      std::size_t k) {
  const auto p = make_problem(spec);
  return build_finite(p, std::vector<Quantizer>(p.num_agents, Quantizer(radius, n)),
                      std::vector<ActionGrid>(p.num_agents, ActionGrid(m, k, true)));
}

void check_descent(const SolveTrace& trace) {
  for (std::size_t s = 1; s < trace.costs.size(); ++s) {
    CHECK(trace.costs[s] <= trace.costs[s - 1] + 1e-12);
  }
}

}  // namespace

TEST_CASE("best response never increases the cost") {
  std::mt19937_64 gen(21);
  for (const ProblemSpec& spec : {ProblemSpec{WitsenhausenSpec{1.0}}, ProblemSpec{RelaySpec{}},
                                  ProblemSpec{RadnerSpec{}}}) {
    const auto fm = model(spec, 2.0, 6, 2.0, 5);
    auto table = constant_table(fm, 0.7);
    for (int round = 0; round < 3; ++round) {
      for (std::size_t i = 0; i < fm.num_agents(); ++i) {
        const double before = eval_finite_cost(fm, table);
        table = best_response(fm, table, i);
        CHECK(eval_finite_cost(fm, table) <= before + 1e-12);
      }
    }
  }
}

TEST_CASE("best response is a per-symbol argmin") {
  const auto fm = model(WitsenhausenSpec{1.0}, 2.0, 4, 2.0, 5);
  const PolicyTable start{{{0.0, -1.0, -0.5, 0.5, 1.0}, {0.0, 0.0, 0.0, 0.0, 0.0}}};
  const auto br = best_response(fm, start, 1);
  for (std::size_t s = 0; s < 5; ++s) {
    double best = std::numeric_limits<double>::infinity();
    for (double a : fm.agents[1].grid.points()) {
      auto t = start;
      t.actions[1][s] = a;
      best = std::min(best, eval_finite_cost(fm, t));
    }
    auto t = start;
    t.actions[1][s] = br.actions[1][s];
    CHECK(eval_finite_cost(fm, t) == doctest::Approx(best).epsilon(1e-13));
  }
}

TEST_CASE("off-grid actions survive only when strictly better") {
  const auto fm = model(WitsenhausenSpec{1.0}, 2.0, 4, 2.0, 3);
  auto t = constant_table(fm);
  t.actions[1].assign(5, 0.05);
  const auto br = best_response(fm, t, 1);
  for (double a : br.actions[1]) CHECK(a != 0.05);
}

TEST_CASE("pbp traces descend and end at a fixed point") {
  std::mt19937_64 gen(22);
  for (const ProblemSpec& spec : {ProblemSpec{WitsenhausenSpec{1.0}}, ProblemSpec{WitsenhausenSpec{0.1}},
                                  ProblemSpec{RelaySpec{}}, ProblemSpec{RadnerSpec{}}}) {
    const auto fm = model(spec, 2.0, 8, 2.0, 9);
    const auto res = pbp_solve(fm, constant_table(fm, 1.0));
    check_descent(res.trace);
    CHECK(res.trace.costs.front() == doctest::Approx(eval_finite_cost(fm, constant_table(fm, 1.0))));
    CHECK(res.trace.final_cost() == doctest::Approx(eval_finite_cost(fm, res.table)).epsilon(1e-13));
    CHECK(res.trace.termination != Termination::MaxSweeps);
    const auto again = pbp_solve(fm, res.table, 1);
    CHECK(res.trace.final_cost() - again.trace.final_cost() < 1e-10);
  }
}

TEST_CASE("pbp termination reasons") {
  const auto fm = model(WitsenhausenSpec{1.0}, 1.0, 1, 1.0, 3);
  const auto zero = pbp_solve(fm, constant_table(fm));
  CHECK(zero.trace.termination == Termination::Converged);
  CHECK(zero.trace.sweeps() == 1);
  CHECK(zero.trace.final_cost() == 0.0);

  const auto big = model(RelaySpec{}, 4.0, 32, 2.0, 17);
  const auto capped = pbp_solve(big, constant_table(big, 1.0), 1);
  CHECK(capped.trace.sweeps() == 1);
  CHECK(std::string(to_string(Termination::Stalled)) == "stalled");
}

TEST_CASE("exhaustive search finds the brute-force minimum") {
  for (const ProblemSpec& spec : {ProblemSpec{WitsenhausenSpec{1.0}}, ProblemSpec{RadnerSpec{0.1}}}) {
    const auto fm = model(spec, 1.0, 2, 1.0, 3);
    const auto ex = exhaustive_solve(fm);
    CHECK(ex.evaluated == 729);
    double best = std::numeric_limits<double>::infinity();
    PolicyTable first;
    PolicyTable t;
    auto e = enumerate_policies(fm);
    while (e.next(t)) {
      const double c = brute_force_cost(fm, t);
      if (c < best - 1e-12) {
        best = c;
        first = t;
      }
    }
    CHECK(ex.cost == doctest::Approx(best).epsilon(1e-12));
    CHECK(ex.table == first);
  }
  CHECK_THROWS_AS(exhaustive_solve(model(WitsenhausenSpec{}, 2, 8, 2, 9), 100), Error);
}

TEST_CASE("multi-start is deterministic and beats its own starts") {
  const auto fm = model(WitsenhausenSpec{1.0}, 2.0, 8, 2.0, 9);
  const auto a = multi_start_solve(fm, 8, 5, kDefaultMaxSweeps, kDefaultTolerance, 1);
  const auto b = multi_start_solve(fm, 8, 5, kDefaultMaxSweeps, kDefaultTolerance, 4);
  CHECK(a.table == b.table);
  CHECK(a.cost == b.cost);
  CHECK(a.best_start == b.best_start);
  REQUIRE(a.traces.size() == 9);
  for (const auto& tr : a.traces) {
    check_descent(tr);
    CHECK(a.cost <= tr.final_cost());
  }
  CHECK(a.traces[0].costs[0] == eval_finite_cost(fm, constant_table(fm)));

  const auto seeded = multi_start_solve(fm, 8, 6, kDefaultMaxSweeps, kDefaultTolerance, 2);
  CHECK(seeded.traces[0].costs == a.traces[0].costs);

  const auto extra = multi_start_solve(fm, 0, 5, kDefaultMaxSweeps, kDefaultTolerance, 1, {a.table});
  REQUIRE(extra.traces.size() == 2);
  CHECK(extra.cost <= a.cost + 1e-15);
}

TEST_CASE("multi-start reaches the exhaustive optimum on tiny models") {
  for (std::size_t n : {2, 3}) {
    const auto fm = model(WitsenhausenSpec{1.0}, 1.0, n, 1.0, 3);
    const auto ex = exhaustive_solve(fm);
    const auto ms = multi_start_solve(fm, 64, 1, kDefaultMaxSweeps, kDefaultTolerance, 4);
    CHECK(ex.cost <= ms.cost + 1e-15);
    CHECK(ms.cost - ex.cost <= 1e-9);
  }
}
