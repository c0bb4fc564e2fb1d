#include "teamquant/solver.hpp"

#include <limits>

#include "teamquant/errors.hpp"
#include "teamquant/rng.hpp"

namespace teamquant {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxSweeps: return "max_sweeps";
    case Termination::Stalled: return "stalled";
  }
  return "unknown";
}

PolicyTable best_response(const FiniteTeamModel& fm, const PolicyTable& table, std::size_t agent) {
  const auto& points = fm.agents.at(agent).grid.points();
  const auto costs = symbol_action_costs(fm, table, agent, points);
  PolicyTable out = table;
  for (std::size_t j = 0; j < costs.size(); ++j) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < points.size(); ++c) {
      if (costs[j][c] < costs[j][best]) best = c;
    }
    const double current = table.actions[agent][j];
    const bool on_grid = points[fm.agents[agent].grid.nearest_index(current)] == current;
    if (!on_grid && costs[j][points.size()] < costs[j][best]) continue;
    out.actions[agent][j] = points[best];
  }
  return out;
}

SolveResult pbp_solve(const FiniteTeamModel& fm, const PolicyTable& init, std::size_t max_sweeps,
                      double tol) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidParameter, "tolerance must be positive");
  SolveResult result{init, {}};
  double cost = eval_finite_cost(fm, init);
  result.trace.costs.push_back(cost);
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    PolicyTable next = result.table;
    for (std::size_t i = 0; i < fm.num_agents(); ++i) next = best_response(fm, next, i);
    const double next_cost = eval_finite_cost(fm, next);
    const bool unchanged = next == result.table;
    result.table = std::move(next);
    result.trace.costs.push_back(next_cost);
    const double improvement = cost - next_cost;
    cost = next_cost;
    if (unchanged) {
      result.trace.termination = Termination::Converged;
      return result;
    }
    if (improvement < tol) {
      result.trace.termination = Termination::Stalled;
      return result;
    }
  }
  result.trace.termination = Termination::MaxSweeps;
  return result;
}

MultiStartResult multi_start_solve(const FiniteTeamModel& fm, std::size_t starts,
                                   std::uint64_t seed, std::size_t max_sweeps, double tol,
                                   std::size_t threads, const std::vector<PolicyTable>& extra_inits) {
  std::vector<PolicyTable> inits{constant_table(fm, 0.0)};
  for (const auto& t : extra_inits) {
    check_shape(fm, t);
    inits.push_back(t);
  }
  for (std::size_t s = 0; s < starts; ++s) {
    Rng rng(seed, s);
    PolicyTable t;
    for (const auto& a : fm.agents) {
      std::vector<double> row(a.symbol_count());
      for (double& v : row) v = a.grid.points()[rng.index(a.grid.size())];
      t.actions.push_back(std::move(row));
    }
    inits.push_back(std::move(t));
  }

  std::vector<SolveResult> runs(inits.size());
  parallel_for(inits.size(), threads, [&](std::size_t s) {
    runs[s] = pbp_solve(fm, inits[s], max_sweeps, tol);
    runs[s].trace.start_index = s;
  });

  MultiStartResult out;
  out.cost = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < runs.size(); ++s) {
    if (runs[s].trace.final_cost() < out.cost) {
      out.cost = runs[s].trace.final_cost();
      out.table = runs[s].table;
      out.best_start = s;
    }
    out.traces.push_back(std::move(runs[s].trace));
  }
  return out;
}

ExhaustiveResult exhaustive_solve(const FiniteTeamModel& fm, std::uint64_t cap) {
  PolicyEnumerator it(fm, cap);
  ExhaustiveResult best;
  best.cost = std::numeric_limits<double>::infinity();
  PolicyTable table;
  while (it.next(table)) {
    ++best.evaluated;
    const double c = eval_finite_cost(fm, table);
    if (c < best.cost) {
      best.cost = c;
      best.table = table;
    }
  }
  return best;
}

}  // namespace teamquant
