#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "teamquant/finite_model.hpp"

namespace teamquant {

enum class Termination { Converged, MaxSweeps, Stalled };

const char* to_string(Termination t);

/// costs[0] is the initial J_{l,n}; costs[s] the cost after sweep s.
struct SolveTrace {
  std::vector<double> costs;
  Termination termination = Termination::MaxSweeps;
  std::size_t start_index = 0;

  std::size_t sweeps() const { return costs.empty() ? 0 : costs.size() - 1; }
  double final_cost() const { return costs.back(); }
};

inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr std::size_t kDefaultMaxSweeps = 500;

/// Replaces agent's row with per-symbol argmin over the agent's grid, others
/// fixed. Ties go to the smaller action. An off-grid current action survives
/// only if it is strictly better than every grid point, so J_{l,n} never
/// increases.
PolicyTable best_response(const FiniteTeamModel& fm, const PolicyTable& table, std::size_t agent);

struct SolveResult {
  PolicyTable table;
  SolveTrace trace;
};

/// Cyclic best responses over agents 1..N until a sweep improves J_{l,n} by
/// less than tol (Stalled), leaves the table unchanged (Converged), or
/// max_sweeps is reached.
SolveResult pbp_solve(const FiniteTeamModel& fm, const PolicyTable& init,
                      std::size_t max_sweeps = kDefaultMaxSweeps, double tol = kDefaultTolerance);

struct MultiStartResult {
  PolicyTable table;
  double cost = 0.0;
  std::vector<SolveTrace> traces;  ///< all-zeros start first, then random starts
  std::size_t best_start = 0;
};

/// pbp_solve from the all-zeros table, any `extra_inits`, and `starts`
/// seeded random grid tables; the lowest terminal cost wins (earliest start on
/// ties). Starts run concurrently; the result does not depend on `threads`.
MultiStartResult multi_start_solve(const FiniteTeamModel& fm, std::size_t starts,
                                   std::uint64_t seed, std::size_t max_sweeps = kDefaultMaxSweeps,
                                   double tol = kDefaultTolerance, std::size_t threads = 1,
                                   const std::vector<PolicyTable>& extra_inits = {});

struct ExhaustiveResult {
  PolicyTable table;
  double cost = 0.0;
  std::uint64_t evaluated = 0;
};

/// Global minimum over all grid tables; first in lexicographic order on ties.
ExhaustiveResult exhaustive_solve(const FiniteTeamModel& fm,
                                  std::uint64_t cap = kDefaultEnumerationCap);

}  // namespace teamquant
