#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "teamquant/team_model.hpp"

namespace teamquant {

/// Cost weight(u1 - y1)^2 + (u2 - u1)^2 with y1 ~ N(0,1), y2 = u1 + v.
struct WitsenhausenSpec {
  double weight = 1.0;

  bool operator==(const WitsenhausenSpec&) const = default;
};

/// N-agent chain: y1 = x + v0, y^i = u^{i-1} + v^{i-1};
/// cost (u^N - x)^2 + sum_{i<N} weights[i] (u^i)^2.
struct RelaySpec {
  std::size_t num_agents = 3;
  std::vector<double> weights{0.1, 0.1};
  double state_sd = 1.0;
  double noise_sd = 1.0;

  bool operator==(const RelaySpec&) const = default;
};

/// Static quadratic team: y^i = x + w^i, cost (x - u1 - u2)^2 + r(u1^2 + u2^2).
struct RadnerSpec {
  double r = 0.1;

  bool operator==(const RadnerSpec&) const = default;
};

using ProblemSpec = std::variant<WitsenhausenSpec, RelaySpec, RadnerSpec>;

std::string problem_name(const ProblemSpec& spec);
void validate(const ProblemSpec& spec);

TeamProblem make_witsenhausen(const WitsenhausenSpec& spec);
TeamProblem make_relay(const RelaySpec& spec);
TeamProblem make_radner(const RadnerSpec& spec);
TeamProblem make_problem(const ProblemSpec& spec);

}  // namespace teamquant
