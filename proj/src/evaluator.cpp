#include "teamquant/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "teamquant/errors.hpp"
#include "teamquant/gaussian.hpp"

namespace teamquant {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// Mass of symbol s of quantizer q under N(mean, 1).
double shifted_mass(const Quantizer& q, std::size_t s, double mean) {
  double mass = 0.0;
  for (const Interval& iv : q.symbol_intervals(s)) mass += std_normal_mass(iv.lo - mean, iv.hi - mean);
  return mass;
}

Interval scaled(const Interval& iv, double factor) { return {iv.lo * factor, iv.hi * factor}; }

void require_agents(const QuantizedPolicy& policy, std::size_t n, const char* problem) {
  if (policy.num_agents() != n) {
    throw Error(ErrorKind::InvalidParameter, std::string(problem) + " policy has wrong agent count");
  }
}

}  // namespace

std::vector<PolicyPiece> QuantizedPolicy::pieces(std::size_t agent) const {
  const Quantizer& q = quantizers.at(agent);
  const auto& actions = table.actions.at(agent);
  std::vector<PolicyPiece> out;
  const auto tails = q.symbol_intervals(0);
  out.push_back({tails[0], actions[0]});
  for (std::size_t j = 0; j < q.n(); ++j) out.push_back({q.cell(j), actions[j + 1]});
  out.push_back({tails[1], actions[0]});
  return out;
}

ContinuousPolicy QuantizedPolicy::continuous() const {
  ContinuousPolicy out;
  for (std::size_t i = 0; i < num_agents(); ++i) {
    out.emplace_back([q = quantizers[i], row = table.actions[i]](double y) {
      return row[q.quantize(y).index];
    });
  }
  return out;
}

QuantizedPolicy extend_policy(const PolicyTable& table, const std::vector<Quantizer>& quantizers) {
  bool ok = table.actions.size() == quantizers.size();
  for (std::size_t i = 0; ok && i < quantizers.size(); ++i) {
    ok = table.actions[i].size() == quantizers[i].symbol_count();
  }
  if (!ok) throw Error(ErrorKind::InvalidParameter, "policy table does not match quantizers");
  return {quantizers, table};
}

double eval_exact_witsenhausen(double weight, const QuantizedPolicy& policy) {
  require_agents(policy, 2, "witsenhausen");
  const Quantizer& q1 = policy.quantizers[0];
  const Quantizer& q2 = policy.quantizers[1];
  const auto& a1 = policy.table.actions[0];
  const auto& a2 = policy.table.actions[1];

  double term1 = 0.0;
  double term2 = 0.0;
  for (std::size_t s = 0; s < q1.symbol_count(); ++s) {
    const double u = a1[s];
    double mass = 0.0;
    for (const Interval& iv : q1.symbol_intervals(s)) {
      const TruncatedMoments tm = truncated_moments(iv);
      term1 += u * u * tm.mass - 2.0 * u * tm.m1 + tm.m2;
      mass += tm.mass;
    }
    if (mass == 0.0) continue;
    double second = 0.0;
    for (std::size_t b = 0; b < q2.symbol_count(); ++b) {
      const double d = a2[b] - u;
      second += d * d * shifted_mass(q2, b, u);
    }
    term2 += mass * second;
  }
  return weight * term1 + term2;
}

double eval_exact_relay(const RelaySpec& spec, const QuantizedPolicy& policy) {
  validate(spec);
  if (spec.state_sd != 1.0 || spec.noise_sd != 1.0) {
    throw Error(ErrorKind::UnsupportedVariance, "exact relay evaluation needs unit variances");
  }
  const std::size_t n = spec.num_agents;
  require_agents(policy, n, "relay");
  if (n > kRelayExactMaxAgents) {
    throw Error(ErrorKind::TooLarge, "exact relay evaluation supports at most 8 agents");
  }
  for (const auto& q : policy.quantizers) {
    if (q.n() + 2 > kRelayExactMaxPieces) {
      throw Error(ErrorKind::TooLarge, "exact relay evaluation supports at most 1024 pieces");
    }
  }
  const auto& actions = policy.table.actions;

  // Stage 1: y1 = x + v0 ~ N(0, 2); E[x | y1] = y1 / 2.
  const Quantizer& q1 = policy.quantizers[0];
  std::vector<double> dist(q1.symbol_count(), 0.0);
  std::vector<double> x_moment(q1.symbol_count(), 0.0);
  for (std::size_t s = 0; s < q1.symbol_count(); ++s) {
    for (const Interval& iv : q1.symbol_intervals(s)) {
      const TruncatedMoments tm = truncated_moments(scaled(iv, 1.0 / kSqrt2));
      dist[s] += tm.mass;
      x_moment[s] += 0.5 * kSqrt2 * tm.m1;
    }
  }

  // transitions[i][a][b] = P(symbol b at agent i | symbol a at agent i-1).
  std::vector<std::vector<std::vector<double>>> transitions(n);
  for (std::size_t i = 1; i < n; ++i) {
    const Quantizer& q = policy.quantizers[i];
    transitions[i].assign(actions[i - 1].size(), std::vector<double>(q.symbol_count()));
    for (std::size_t a = 0; a < actions[i - 1].size(); ++a) {
      for (std::size_t b = 0; b < q.symbol_count(); ++b) {
        transitions[i][a][b] = shifted_mass(q, b, actions[i - 1][a]);
      }
    }
  }

  double cost = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      std::vector<double> next(policy.quantizers[i].symbol_count(), 0.0);
      for (std::size_t a = 0; a < dist.size(); ++a) {
        for (std::size_t b = 0; b < next.size(); ++b) next[b] += dist[a] * transitions[i][a][b];
      }
      dist = std::move(next);
    }
    double second = 0.0;
    for (std::size_t s = 0; s < dist.size(); ++s) second += dist[s] * actions[i][s] * actions[i][s];
    cost += (i + 1 < n) ? spec.weights[i] * second : second;
  }

  // E[u^N | symbol at agent 1], backwards through the chain.
  std::vector<double> tail(actions[n - 1]);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::vector<double> prev(actions[i - 1].size(), 0.0);
    for (std::size_t a = 0; a < prev.size(); ++a) {
      for (std::size_t b = 0; b < tail.size(); ++b) prev[a] += transitions[i][a][b] * tail[b];
    }
    tail = std::move(prev);
  }
  double cross = 0.0;
  for (std::size_t s = 0; s < tail.size(); ++s) cross += x_moment[s] * tail[s];
  return cost - 2.0 * cross;
}

double eval_exact_radner(double r, const QuantizedPolicy& policy, std::size_t nodes) {
  require_agents(policy, 2, "radner");
  const auto& rule = gauss_hermite(nodes);
  double total = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double x = rule.nodes[k];
    double mean[2] = {0.0, 0.0};
    double square[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < 2; ++i) {
      const Quantizer& q = policy.quantizers[i];
      for (std::size_t s = 0; s < q.symbol_count(); ++s) {
        const double p = shifted_mass(q, s, x);
        const double u = policy.table.actions[i][s];
        mean[i] += p * u;
        square[i] += p * u * u;
      }
    }
    const double conditional = x * x - 2.0 * x * (mean[0] + mean[1]) +
                               (1.0 + r) * (square[0] + square[1]) + 2.0 * mean[0] * mean[1];
    total += rule.weights[k] * conditional;
  }
  return total;
}

std::optional<double> eval_exact(const ProblemSpec& spec, const QuantizedPolicy& policy) {
  if (const auto* w = std::get_if<WitsenhausenSpec>(&spec)) {
    return eval_exact_witsenhausen(w->weight, policy);
  }
  if (const auto* r = std::get_if<RelaySpec>(&spec)) {
    if (r->state_sd != 1.0 || r->noise_sd != 1.0 || r->num_agents > kRelayExactMaxAgents) {
      return std::nullopt;
    }
    for (const auto& q : policy.quantizers) {
      if (q.n() + 2 > kRelayExactMaxPieces) return std::nullopt;
    }
    return eval_exact_relay(*r, policy);
  }
  return eval_exact_radner(std::get<RadnerSpec>(spec).r, policy);
}

double affine_cost_witsenhausen(double weight, double lambda) {
  const double l2 = lambda * lambda;
  return weight * (lambda - 1.0) * (lambda - 1.0) + l2 / (1.0 + l2);
}

AffineOracle affine_oracle_witsenhausen(double weight) {
  if (!(weight > 0.0)) throw Error(ErrorKind::InvalidParameter, "weight must be positive");
  constexpr int kGrid = 1000;
  int best = 0;
  for (int i = 1; i <= kGrid; ++i) {
    if (affine_cost_witsenhausen(weight, i / double(kGrid)) <
        affine_cost_witsenhausen(weight, best / double(kGrid))) {
      best = i;
    }
  }
  double lo = std::max(0, best - 1) / double(kGrid);
  double hi = std::min(kGrid, best + 1) / double(kGrid);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - ratio * (hi - lo);
  double b = lo + ratio * (hi - lo);
  double fa = affine_cost_witsenhausen(weight, a);
  double fb = affine_cost_witsenhausen(weight, b);
  while (hi - lo > 1e-10) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - ratio * (hi - lo);
      fa = affine_cost_witsenhausen(weight, a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + ratio * (hi - lo);
      fb = affine_cost_witsenhausen(weight, b);
    }
  }
  const double lambda = 0.5 * (lo + hi);
  return {lambda, affine_cost_witsenhausen(weight, lambda)};
}

double radner_linear_cost(double r, double alpha) {
  const double e = 1.0 - 2.0 * alpha;
  return e * e + (2.0 + 4.0 * r) * alpha * alpha;
}

RadnerOracle radner_oracle(double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidParameter, "r must be positive");
  // d/dalpha: -4(1 - 2 alpha) + 2(2 + 4r) alpha = 0.
  const double alpha = 1.0 / (3.0 + 2.0 * r);
  return {alpha, radner_linear_cost(r, alpha)};
}

std::optional<double> oracle_value(const ProblemSpec& spec) {
  if (const auto* w = std::get_if<WitsenhausenSpec>(&spec)) {
    return affine_oracle_witsenhausen(w->weight).cost;
  }
  if (const auto* r = std::get_if<RadnerSpec>(&spec)) return radner_oracle(r->r).cost;
  return std::nullopt;
}

}  // namespace teamquant
