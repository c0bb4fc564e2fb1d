#include "teamquant/finite_model.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "teamquant/errors.hpp"
#include "teamquant/gaussian.hpp"

namespace teamquant {

namespace {

using Matrix = std::vector<std::vector<double>>;

double conditional_mass(const Quantizer& q, std::size_t symbol, double x, double sd) {
  double mass = 0.0;
  for (const Interval& iv : q.symbol_intervals(symbol)) {
    mass += std_normal_mass((iv.lo - x) / sd, (iv.hi - x) / sd);
  }
  return mass;
}

// P(j) f(u, y_j) for every symbol j.
std::vector<double> previous_weights(const AgentSymbols& a, double u) {
  std::vector<double> w(a.symbol_count());
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = a.masses[j] * std::exp(a.levels[j] * u - 0.5 * u * u);
  }
  return w;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteCost, what);
}

// Symbol weights of each agent that do not depend on the previous action,
// tabulated per state node: fixed[i][q][j]. Empty for ReducedOnPrevious.
std::vector<Matrix> fixed_weights(const FiniteTeamModel& fm) {
  std::vector<Matrix> out(fm.num_agents());
  for (std::size_t i = 0; i < fm.num_agents(); ++i) {
    const AgentSymbols& a = fm.agents[i];
    if (a.weight == SymbolWeight::ReducedOnPrevious) continue;
    out[i].assign(fm.state_points.size(), std::vector<double>(a.symbol_count()));
    for (std::size_t q = 0; q < fm.state_points.size(); ++q) {
      const double x = fm.state_points[q];
      for (std::size_t j = 0; j < a.symbol_count(); ++j) {
        double w = a.masses[j];
        if (a.weight == SymbolWeight::ReducedOnState) {
          w *= std::exp(a.levels[j] * x - 0.5 * x * x);
        } else if (a.weight == SymbolWeight::ConditionalOnState) {
          w = conditional_mass(a.quantizer, j, x, a.noise_sd);
        }
        out[i][q][j] = w;
      }
    }
  }
  return out;
}

// Weight rows W_i(jp, .) for each previous symbol jp, when they depend on the
// previous action; indexed [jp][j].
Matrix previous_rows(const FiniteTeamModel& fm, std::size_t i, const std::vector<double>& u_prev) {
  Matrix rows;
  rows.reserve(u_prev.size());
  for (double u : u_prev) rows.push_back(previous_weights(fm.agents[i], u));
  return rows;
}

// Forward and backward sweeps of the chain for one policy table.
class Chain {
 public:
  Chain(const FiniteTeamModel& fm, const PolicyTable& table)
      : fm_(fm), table_(table), fixed_(fixed_weights(fm)) {
    prev_rows_.resize(fm.num_agents());
    for (std::size_t i = 1; i < fm.num_agents(); ++i) {
      if (fm.agents[i].weight == SymbolWeight::ReducedOnPrevious) {
        prev_rows_[i] = previous_rows(fm, i, table.actions[i - 1]);
      }
    }
  }

  // Weight of symbol j of agent i at node q given previous symbol jp.
  double weight(std::size_t i, std::size_t q, std::size_t jp, std::size_t j) const {
    if (fm_.agents[i].weight == SymbolWeight::ReducedOnPrevious) return prev_rows_[i][jp][j];
    return fixed_[i][q][j];
  }

  // Forward mass A and weighted cost B after stages 0..last at node q.
  void forward(std::size_t q, std::size_t last, std::vector<double>& mass,
               std::vector<double>& cost) const {
    const double x = fm_.state_points[q];
    std::vector<double> prev_mass{1.0}, prev_cost{0.0}, prev_action{0.0};
    for (std::size_t i = 0; i <= last; ++i) {
      const AgentSymbols& a = fm_.agents[i];
      const auto& actions = table_.actions[i];
      const StageCost& stage = fm_.stage_costs[i];
      mass.assign(a.symbol_count(), 0.0);
      cost.assign(a.symbol_count(), 0.0);
      for (std::size_t j = 0; j < a.symbol_count(); ++j) {
        double am = 0.0, bc = 0.0;
        for (std::size_t jp = 0; jp < prev_mass.size(); ++jp) {
          const double w = i == 0 ? weight(0, q, 0, j) : weight(i, q, jp, j);
          am += prev_mass[jp] * w;
          bc += w * (prev_cost[jp] +
                     prev_mass[jp] * stage(x, a.levels[j], prev_action[jp], actions[j]));
        }
        mass[j] = am;
        cost[j] = bc;
      }
      prev_mass = mass;
      prev_cost = cost;
      prev_action = actions;
    }
  }

  // Downstream mass and cost at each symbol of stage `first`, evaluated at the
  // table's actions.
  void backward(std::size_t q, std::size_t first, std::vector<double>& mass,
                std::vector<double>& cost) const {
    const std::size_t n = fm_.num_agents();
    mass.assign(fm_.agents[n - 1].symbol_count(), 1.0);
    cost.assign(fm_.agents[n - 1].symbol_count(), 0.0);
    for (std::size_t k = n - 1; k > first; --k) {
      std::vector<double> m(fm_.agents[k - 1].symbol_count()), v(m.size());
      for (std::size_t j = 0; j < m.size(); ++j) {
        downstream(q, k - 1, j, table_.actions[k - 1][j], mass, cost, m[j], v[j]);
      }
      mass = std::move(m);
      cost = std::move(v);
    }
  }

  // Downstream mass/cost of agent i holding action u (previous symbol jp for
  // weight lookup), given next-stage downstream arrays.
  void downstream(std::size_t q, std::size_t i, std::size_t jp, double u,
                  const std::vector<double>& next_mass, const std::vector<double>& next_cost,
                  double& m, double& v) const {
    const std::size_t k = i + 1;
    const AgentSymbols& a = fm_.agents[k];
    const double x = fm_.state_points[q];
    const StageCost& stage = fm_.stage_costs[k];
    m = 0.0;
    v = 0.0;
    for (std::size_t j = 0; j < a.symbol_count(); ++j) {
      const double w = weight(k, q, jp, j);
      m += w * next_mass[j];
      v += w * (stage(x, a.levels[j], u, table_.actions[k][j]) * next_mass[j] + next_cost[j]);
    }
  }

  const FiniteTeamModel& fm_;
  const PolicyTable& table_;
  std::vector<Matrix> fixed_;
  std::vector<Matrix> prev_rows_;
};

std::vector<double> state_nodes_for(const TeamProblem& p, std::size_t nodes,
                                    std::vector<double>& weights) {
  if (p.state_dim == 0) {
    weights = {1.0};
    return {0.0};
  }
  if (p.state_dim != 1) {
    throw Error(ErrorKind::InvalidParameter, "finite models support a scalar state only");
  }
  const auto& rule = gauss_hermite(nodes);
  weights = rule.weights;
  std::vector<double> points(rule.nodes);
  for (double& x : points) x *= p.state_sd;
  return points;
}

void check_inputs(const TeamProblem& p, const std::vector<Quantizer>& quantizers,
                  const std::vector<ActionGrid>& grids) {
  if (quantizers.size() != p.num_agents || grids.size() != p.num_agents) {
    throw Error(ErrorKind::InvalidParameter, "need one quantizer and one action grid per agent");
  }
  if (p.stage_costs.size() != p.num_agents) {
    throw Error(ErrorKind::InvalidParameter,
                "finite model needs the cost decomposed into per-agent stage terms");
  }
}

}  // namespace

FiniteTeamModel build_finite(const ReducedTeam& reduced, const std::vector<Quantizer>& quantizers,
                             const std::vector<ActionGrid>& grids, std::size_t state_nodes) {
  const TeamProblem& p = reduced.problem;
  check_inputs(p, quantizers, grids);
  FiniteTeamModel fm;
  fm.problem = p;
  fm.reduced = reduced;
  fm.stage_costs = p.stage_costs;
  fm.has_state = p.state_dim > 0;
  fm.state_nodes = fm.has_state ? state_nodes : 0;
  fm.state_points = state_nodes_for(p, state_nodes, fm.state_weights);
  for (std::size_t i = 0; i < p.num_agents; ++i) {
    const GaussianObservation& g = reduced.observations.at(i);
    SymbolWeight kind = SymbolWeight::Marginal;
    if (g.source == MeanSource::State) kind = SymbolWeight::ReducedOnState;
    if (g.source == MeanSource::Agent) {
      if (g.agent + 1 != i) {
        throw Error(ErrorKind::InvalidParameter,
                    "finite model requires each agent to observe its predecessor");
      }
      kind = SymbolWeight::ReducedOnPrevious;
    }
    const Quantizer& q = quantizers[i];
    std::vector<double> levels{q.overflow_level()};
    levels.insert(levels.end(), q.levels().begin(), q.levels().end());
    fm.agents.push_back({q, grids[i], std::move(levels), q.cell_masses(1.0), kind, 1.0});
  }
  return fm;
}

FiniteTeamModel build_finite(const TeamProblem& problem, const std::vector<Quantizer>& quantizers,
                             const std::vector<ActionGrid>& grids, std::size_t state_nodes) {
  if (!problem.is_static) {
    return build_finite(static_reduce(problem), quantizers, grids, state_nodes);
  }
  check_inputs(problem, quantizers, grids);
  FiniteTeamModel fm;
  fm.problem = problem;
  fm.stage_costs = problem.stage_costs;
  fm.has_state = problem.state_dim > 0;
  fm.state_nodes = fm.has_state ? state_nodes : 0;
  fm.state_points = state_nodes_for(problem, state_nodes, fm.state_weights);
  for (std::size_t i = 0; i < problem.num_agents; ++i) {
    const auto& kernel = problem.kernels.at(i);
    if (!kernel.gaussian || kernel.gaussian->source == MeanSource::Agent) {
      throw Error(ErrorKind::UnsupportedKernel,
                  "static finite model needs Gaussian kernels driven by the state");
    }
    const GaussianObservation g = *kernel.gaussian;
    const Quantizer& q = quantizers[i];
    std::vector<double> levels{q.overflow_level()};
    levels.insert(levels.end(), q.levels().begin(), q.levels().end());
    const bool on_state = g.source == MeanSource::State;
    const double scale =
        on_state ? std::hypot(problem.state_sd, g.noise_sd) : g.noise_sd;
    fm.agents.push_back({q, grids[i], std::move(levels), q.cell_masses(scale),
                         on_state ? SymbolWeight::ConditionalOnState : SymbolWeight::Marginal,
                         g.noise_sd});
  }
  return fm;
}

PolicyTable constant_table(const FiniteTeamModel& fm, double value) {
  PolicyTable t;
  for (const auto& a : fm.agents) t.actions.emplace_back(a.symbol_count(), a.grid.nearest(value));
  return t;
}

void check_shape(const FiniteTeamModel& fm, const PolicyTable& table) {
  bool ok = table.actions.size() == fm.num_agents();
  for (std::size_t i = 0; ok && i < fm.num_agents(); ++i) {
    ok = table.actions[i].size() == fm.agents[i].symbol_count();
  }
  if (!ok) throw Error(ErrorKind::InvalidParameter, "policy table shape does not match model");
}

double eval_finite_cost(const FiniteTeamModel& fm, const PolicyTable& table) {
  check_shape(fm, table);
  const Chain chain(fm, table);
  double total = 0.0;
  std::vector<double> mass, cost;
  for (std::size_t q = 0; q < fm.state_points.size(); ++q) {
    chain.forward(q, fm.num_agents() - 1, mass, cost);
    double node = 0.0;
    for (double c : cost) node += c;
    total += fm.state_weights[q] * node;
  }
  require_finite(total, "finite-model cost is not finite");
  return total;
}

std::vector<std::vector<double>> symbol_action_costs(const FiniteTeamModel& fm,
                                                     const PolicyTable& table, std::size_t agent,
                                                     const std::vector<double>& candidates) {
  check_shape(fm, table);
  if (agent >= fm.num_agents()) throw Error(ErrorKind::InvalidParameter, "agent out of range");
  const Chain chain(fm, table);
  const AgentSymbols& a = fm.agents[agent];
  const std::size_t n = fm.num_agents();
  const std::size_t symbols = a.symbol_count();
  const std::size_t k = candidates.size();
  const StageCost& stage = fm.stage_costs[agent];
  const std::vector<double>& current = table.actions[agent];

  // Next agent's weight rows for each candidate action, when they depend on it.
  Matrix next_cand_rows, next_cur_rows;
  const bool next_on_prev =
      agent + 1 < n && fm.agents[agent + 1].weight == SymbolWeight::ReducedOnPrevious;
  if (next_on_prev) {
    next_cand_rows = previous_rows(fm, agent + 1, candidates);
    next_cur_rows = previous_rows(fm, agent + 1, current);
  }
  std::vector<double> prev_action{0.0};
  if (agent > 0) prev_action = table.actions[agent - 1];

  Matrix out(symbols, std::vector<double>(k + 1, 0.0));
  std::vector<double> up_mass, up_cost, down_mass, down_cost;
  std::vector<double> cand_m(k, 1.0), cand_v(k, 0.0), cur_m(symbols, 1.0), cur_v(symbols, 0.0);
  for (std::size_t q = 0; q < fm.state_points.size(); ++q) {
    const double x = fm.state_points[q];
    const double wq = fm.state_weights[q];
    if (agent > 0) {
      chain.forward(q, agent - 1, up_mass, up_cost);
    } else {
      up_mass = {1.0};
      up_cost = {0.0};
    }
    if (agent + 1 < n) {
      chain.backward(q, agent + 1, down_mass, down_cost);
      const AgentSymbols& next = fm.agents[agent + 1];
      const StageCost& next_stage = fm.stage_costs[agent + 1];
      auto reduce = [&](double u, const std::vector<double>* row, double& m, double& v) {
        m = 0.0;
        v = 0.0;
        for (std::size_t j = 0; j < next.symbol_count(); ++j) {
          const double w = row ? (*row)[j] : chain.fixed_[agent + 1][q][j];
          m += w * down_mass[j];
          v += w * (next_stage(x, next.levels[j], u, table.actions[agent + 1][j]) * down_mass[j] +
                    down_cost[j]);
        }
      };
      for (std::size_t c = 0; c < k; ++c) {
        reduce(candidates[c], next_on_prev ? &next_cand_rows[c] : nullptr, cand_m[c], cand_v[c]);
      }
      for (std::size_t j = 0; j < symbols; ++j) {
        reduce(current[j], next_on_prev ? &next_cur_rows[j] : nullptr, cur_m[j], cur_v[j]);
      }
    }
    for (std::size_t j = 0; j < symbols; ++j) {
      double in_mass = 0.0, in_cost = 0.0;
      std::vector<double> w(up_mass.size());
      for (std::size_t jp = 0; jp < up_mass.size(); ++jp) {
        w[jp] = agent == 0 ? chain.weight(0, q, 0, j) : chain.weight(agent, q, jp, j);
        in_mass += w[jp] * up_mass[jp];
        in_cost += w[jp] * up_cost[jp];
      }
      auto contribution = [&](double u, double m, double v) {
        double stage_cost = 0.0;
        for (std::size_t jp = 0; jp < up_mass.size(); ++jp) {
          stage_cost += w[jp] * up_mass[jp] * stage(x, a.levels[j], prev_action[jp], u);
        }
        return wq * ((in_cost + stage_cost) * m + in_mass * v);
      };
      for (std::size_t c = 0; c < k; ++c) {
        out[j][c] += contribution(candidates[c], cand_m[c], cand_v[c]);
      }
      out[j][k] += contribution(current[j], cur_m[j], cur_v[j]);
    }
  }
  for (const auto& row : out) {
    for (double v : row) require_finite(v, "finite-model cost is not finite");
  }
  return out;
}

double state_quadrature_delta(const FiniteTeamModel& fm, const PolicyTable& table) {
  if (!fm.has_state) return 0.0;
  FiniteTeamModel finer = fm;
  finer.state_nodes = 2 * fm.state_nodes;
  finer.state_points = state_nodes_for(fm.problem, finer.state_nodes, finer.state_weights);
  return std::abs(eval_finite_cost(finer, table) - eval_finite_cost(fm, table));
}

PolicyEnumerator::PolicyEnumerator(const FiniteTeamModel& fm, std::uint64_t cap) : fm_(&fm) {
  for (const auto& a : fm.agents) {
    const std::uint64_t k = a.grid.size();
    for (std::size_t s = 0; s < a.symbol_count(); ++s) {
      if (count_ > cap / k) {
        throw Error(ErrorKind::TooLarge,
                    "policy enumeration exceeds cap of " + std::to_string(cap) + " tables");
      }
      count_ *= k;
    }
    digits_.emplace_back(a.symbol_count(), 0);
  }
  if (count_ > cap) throw Error(ErrorKind::TooLarge, "policy enumeration exceeds cap");
}

bool PolicyEnumerator::next(PolicyTable& out) {
  if (done_) return false;
  if (started_) {
    bool carried = true;
    for (std::size_t i = digits_.size(); carried && i-- > 0;) {
      const std::size_t k = fm_->agents[i].grid.size();
      for (std::size_t s = digits_[i].size(); carried && s-- > 0;) {
        if (++digits_[i][s] < k) {
          carried = false;
        } else {
          digits_[i][s] = 0;
        }
      }
    }
    if (carried) {
      done_ = true;
      return false;
    }
  }
  started_ = true;
  out.actions.resize(digits_.size());
  for (std::size_t i = 0; i < digits_.size(); ++i) {
    const auto& points = fm_->agents[i].grid.points();
    out.actions[i].resize(digits_[i].size());
    for (std::size_t s = 0; s < digits_[i].size(); ++s) out.actions[i][s] = points[digits_[i][s]];
  }
  return true;
}

std::string policy_to_json(const FiniteTeamModel& fm, const PolicyTable& table) {
  check_shape(fm, table);
  nlohmann::ordered_json doc;
  doc["format"] = "teamquant.policy.v1";
  nlohmann::ordered_json agents = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < fm.num_agents(); ++i) {
    const AgentSymbols& a = fm.agents[i];
    nlohmann::ordered_json entry;
    entry["quantizer"] = {{"radius", a.quantizer.radius()}, {"n", a.quantizer.n()}};
    entry["grid"] = {{"half_width", a.grid.half_width()},
                     {"k", a.grid.requested_k()},
                     {"nested", a.grid.nested()}};
    entry["actions"] = table.actions[i];
    agents[std::to_string(i + 1)] = std::move(entry);
  }
  doc["agents"] = std::move(agents);
  return doc.dump(2) + "\n";
}

StoredPolicy policy_from_json(const std::string& text) {
  StoredPolicy out;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (doc.at("format").get<std::string>() != "teamquant.policy.v1") {
      throw Error(ErrorKind::Config, "unknown policy format");
    }
    const auto& agents = doc.at("agents");
    for (std::size_t i = 1; i <= agents.size(); ++i) {
      const auto& entry = agents.at(std::to_string(i));
      const auto& q = entry.at("quantizer");
      const auto& g = entry.at("grid");
      out.quantizers.emplace_back(q.at("radius").get<double>(), q.at("n").get<std::size_t>());
      out.grids.emplace_back(g.at("half_width").get<double>(), g.at("k").get<std::size_t>(),
                             g.at("nested").get<bool>());
      out.table.actions.push_back(entry.at("actions").get<std::vector<double>>());
      if (out.table.actions.back().size() != out.quantizers.back().symbol_count()) {
        throw Error(ErrorKind::Config, "agent " + std::to_string(i) + " action count mismatch");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("malformed policy JSON: ") + e.what());
  }
  return out;
}

}  // namespace teamquant
