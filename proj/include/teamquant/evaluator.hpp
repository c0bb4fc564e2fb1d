#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "teamquant/finite_model.hpp"
#include "teamquant/problems.hpp"

namespace teamquant {

/// A piece of a piecewise-constant policy: action on an interval of y.
struct PolicyPiece {
  Interval interval;
  double action = 0.0;
};

/// gamma^i = pi^i o Q^i: a finite table extended to the real line.
struct QuantizedPolicy {
  std::vector<Quantizer> quantizers;
  PolicyTable table;

  std::size_t num_agents() const { return quantizers.size(); }
  double act(std::size_t agent, double y) const {
    return table.actions[agent][quantizers[agent].quantize(y).index];
  }
  /// Pieces ordered by position: lower tail, cells, upper tail.
  std::vector<PolicyPiece> pieces(std::size_t agent) const;
  ContinuousPolicy continuous() const;
};

QuantizedPolicy extend_policy(const PolicyTable& table, const std::vector<Quantizer>& quantizers);

/// J(gamma) for Witsenhausen's problem by truncated Gaussian moments (first
/// stage) and conditional cell probabilities y2 | u1 ~ N(u1, 1) (second stage).
double eval_exact_witsenhausen(double weight, const QuantizedPolicy& policy);

inline constexpr std::size_t kRelayExactMaxAgents = 8;
inline constexpr std::size_t kRelayExactMaxPieces = 1024;

/// J(gamma) for the relay chain via a forward recursion over the finite
/// action distributions. Unit variances only (UnsupportedVariance otherwise);
/// TooLarge beyond 8 agents or 1024 pieces per agent.
double eval_exact_relay(const RelaySpec& spec, const QuantizedPolicy& policy);

inline constexpr std::size_t kRadnerExactNodes = 256;

/// J(gamma) for the Radner team, conditioning on x: u1, u2 are independent
/// given x, so E[cost | x] is closed form in the conditional cell masses and
/// the outer x integral uses a Gauss-Hermite rule.
double eval_exact_radner(double r, const QuantizedPolicy& policy,
                         std::size_t nodes = kRadnerExactNodes);

/// Dispatches on the problem; empty when no exact evaluator applies.
std::optional<double> eval_exact(const ProblemSpec& spec, const QuantizedPolicy& policy);

struct AffineOracle {
  double lambda = 0.0;
  double cost = 0.0;
};

/// Witsenhausen cost of u1 = lambda*y1 followed by the MMSE second stage.
double affine_cost_witsenhausen(double weight, double lambda);

/// Best lambda in [0, 1]: grid bracket, then golden-section to 1e-10.
AffineOracle affine_oracle_witsenhausen(double weight);

struct RadnerOracle {
  double alpha = 0.0;
  double cost = 0.0;
};

/// Cost of the symmetric linear policy u^i = alpha y^i.
double radner_linear_cost(double r, double alpha);

/// Person-by-person stationary (and, by strict convexity, optimal) linear
/// policy: alpha = 1 / (3 + 2r).
RadnerOracle radner_oracle(double r);

/// Reference optimum (or affine upper bound) for the problem, when known.
std::optional<double> oracle_value(const ProblemSpec& spec);

struct CostReport {
  std::size_t step = 0;
  double radius = 0.0;
  std::size_t n = 0;
  double m = 0.0;
  std::size_t k = 0;
  double finite_cost = 0.0;
  std::optional<double> exact_cost;
  double mc_cost = 0.0;
  double mc_half_ci95 = 0.0;
  std::optional<double> oracle;
  std::optional<double> gap;         ///< exact_cost - oracle
  std::optional<double> finite_gap;  ///< |finite_cost - exact_cost|
  std::string solver;
  std::size_t sweeps = 0;
  std::optional<double> wall_ms;

  bool operator==(const CostReport&) const = default;
};

}  // namespace teamquant
