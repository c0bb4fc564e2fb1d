#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "teamquant/quantizer.hpp"
#include "teamquant/team_model.hpp"

namespace teamquant {

/// How an agent's symbol weight enters the finite model, given the
/// quadrature state node x and the previous agent's action.
enum class SymbolWeight {
  Marginal,           ///< P(j)
  ReducedOnState,     ///< P(j) f(x, y_j)
  ReducedOnPrevious,  ///< P(j) f(u_prev, y_j)
  ConditionalOnState  ///< W(S_j | x), static teams without reduction
};

struct AgentSymbols {
  Quantizer quantizer;
  ActionGrid grid;
  std::vector<double> levels;  ///< overflow level first
  std::vector<double> masses;  ///< marginal symbol masses, sum to 1
  SymbolWeight weight = SymbolWeight::Marginal;
  double noise_sd = 1.0;       ///< ConditionalOnState only

  std::size_t symbol_count() const { return levels.size(); }
};

/// Finite observation/action model of a team. Cost of a policy table is the
/// exact weighted sum over all symbol tuples, with the scalar state (if any)
/// integrated by a fixed Gauss-Hermite rule.
struct FiniteTeamModel {
  std::vector<AgentSymbols> agents;
  std::vector<StageCost> stage_costs;
  bool has_state = false;
  std::size_t state_nodes = 0;
  std::vector<double> state_points;   ///< {0} when there is no state
  std::vector<double> state_weights;  ///< {1} when there is no state
  TeamProblem problem;                ///< original problem
  std::optional<ReducedTeam> reduced; ///< present unless built from a static team

  std::size_t num_agents() const { return agents.size(); }
};

inline constexpr std::size_t kDefaultStateNodes = 64;

/// Finite model of a statically reduced team: symbol masses under N(0,1).
FiniteTeamModel build_finite(const ReducedTeam& reduced, const std::vector<Quantizer>& quantizers,
                             const std::vector<ActionGrid>& grids,
                             std::size_t state_nodes = kDefaultStateNodes);

/// Static problems use the conditional kernels W(S_j | x) directly; dynamic
/// ones are statically reduced first.
FiniteTeamModel build_finite(const TeamProblem& problem, const std::vector<Quantizer>& quantizers,
                             const std::vector<ActionGrid>& grids,
                             std::size_t state_nodes = kDefaultStateNodes);

/// Per agent: symbol index -> action value.
struct PolicyTable {
  std::vector<std::vector<double>> actions;

  bool operator==(const PolicyTable&) const = default;
};

/// Every agent picks the grid point nearest to `value` for every symbol.
PolicyTable constant_table(const FiniteTeamModel& fm, double value = 0.0);

void check_shape(const FiniteTeamModel& fm, const PolicyTable& table);

/// J_{l,n}: exact finite-model cost. Throws NonFiniteCost on overflow.
double eval_finite_cost(const FiniteTeamModel& fm, const PolicyTable& table);

/// Contribution of each symbol of `agent` to J_{l,n} as a function of that
/// symbol's action, all other entries fixed. Row j holds one value per
/// candidate in `candidates` followed by the value at the table's current
/// action for j. Summing the current column over j gives J_{l,n}.
std::vector<std::vector<double>> symbol_action_costs(const FiniteTeamModel& fm,
                                                     const PolicyTable& table, std::size_t agent,
                                                     const std::vector<double>& candidates);

/// |J(2 * nodes) - J(nodes)| for the state quadrature; 0 without a state.
double state_quadrature_delta(const FiniteTeamModel& fm, const PolicyTable& table);

inline constexpr std::uint64_t kDefaultEnumerationCap = 10'000'000;

/// Lexicographic enumeration of all grid-restricted tables (agent 1 symbol 0
/// is the most significant digit). Throws TooLarge on construction when the
/// table count exceeds `cap`.
class PolicyEnumerator {
 public:
  explicit PolicyEnumerator(const FiniteTeamModel& fm, std::uint64_t cap = kDefaultEnumerationCap);

  std::uint64_t count() const { return count_; }
  /// Writes the next table into `out`; false once exhausted.
  bool next(PolicyTable& out);

 private:
  const FiniteTeamModel* fm_;
  std::uint64_t count_ = 1;
  std::vector<std::vector<std::size_t>> digits_;
  bool started_ = false;
  bool done_ = false;
};

inline PolicyEnumerator enumerate_policies(const FiniteTeamModel& fm,
                                           std::uint64_t cap = kDefaultEnumerationCap) {
  return PolicyEnumerator(fm, cap);
}

/// JSON: {"format", "agents": {"1": {"quantizer", "grid", "actions"}, ...}}.
/// Doubles are written with round-trip precision.
std::string policy_to_json(const FiniteTeamModel& fm, const PolicyTable& table);

struct StoredPolicy {
  std::vector<Quantizer> quantizers;
  std::vector<ActionGrid> grids;
  PolicyTable table;
};

StoredPolicy policy_from_json(const std::string& text);

}  // namespace teamquant
