#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "teamquant/rng.hpp"

namespace teamquant {

using CostFunction = std::function<double(std::span<const double> x, std::span<const double> y,
                                          std::span<const double> u)>;

/// Per-stage term of a cost that decomposes along the agent order:
/// c(x, y, u) = sum_i stage_i(x, y^i, u^{i-1}, u^i), with u^0 := 0.
using StageCost = std::function<double(double x, double y, double u_prev, double u)>;

/// Per-agent decision rule gamma^i: observation -> action.
using ContinuousPolicy = std::vector<std::function<double(double)>>;

/// What the conditional mean of an observation is: nothing (exogenous), the
/// scalar state, or the action of an earlier agent.
enum class MeanSource { Exogenous, State, Agent };

struct GaussianObservation {
  MeanSource source = MeanSource::Exogenous;
  std::size_t agent = 0;  ///< meaningful for MeanSource::Agent
  double noise_sd = 1.0;
};

/// y^i | (x, u^1..u^{i-1}). `sample` always works; `gaussian` is present when
/// the kernel is a Gaussian centred on one input coordinate.
struct ObservationKernel {
  std::function<double(Rng&, std::span<const double> x, std::span<const double> u_prefix)> sample;
  std::optional<GaussianObservation> gaussian;

  static ObservationKernel make_gaussian(MeanSource source, std::size_t agent, double noise_sd);
};

struct TeamProblem {
  std::string name;
  std::size_t num_agents = 0;
  std::size_t state_dim = 0;
  std::function<void(Rng&, std::span<double>)> state_sampler;
  double state_sd = 1.0;  ///< scale of the Gaussian state, when state_dim == 1
  std::vector<ObservationKernel> kernels;
  CostFunction cost;
  std::vector<StageCost> stage_costs;  ///< optional; empty if the cost has no chain form
  bool is_static = false;
};

/// f(u, y) = exp(-(u^2 - 2 y u)/2), so that phi(y - u) = f(u, y) phi(y).
/// Throws Overflow when the exponent is beyond double range.
double gaussian_density_factor(double u, double y);

using DensityFactor = std::function<double(std::span<const double> x,
                                           std::span<const double> u, double y)>;

/// Static reduction: observations become independent N(0,1) under the
/// reference measure and the cost absorbs the densities.
struct ReducedTeam {
  TeamProblem problem;
  std::vector<DensityFactor> density_factors;
  std::vector<GaussianObservation> observations;

  double density_product(std::span<const double> x, std::span<const double> y,
                         std::span<const double> u) const;
  double reduced_cost(std::span<const double> x, std::span<const double> y,
                      std::span<const double> u) const;
};

/// Requires every kernel to be Gaussian with unit noise centred on the state
/// (when state_dim == 1), an earlier agent's action, or nothing. Throws
/// UnsupportedKernel otherwise.
ReducedTeam static_reduce(const TeamProblem& problem);

struct McEstimate {
  double mean = 0.0;
  double half_ci95 = 0.0;
  std::size_t samples = 0;
};

/// Forward simulation of the sequential system: x, y^1, u^1, y^2 | u^1, ...
McEstimate eval_cost_dynamic_mc(const TeamProblem& problem, const ContinuousPolicy& policy,
                                std::size_t samples, std::uint64_t seed,
                                std::size_t threads = 1);

/// Averages the reduced cost with every observation drawn from N(0,1).
McEstimate eval_cost_reduced_mc(const ReducedTeam& reduced, const ContinuousPolicy& policy,
                                std::size_t samples, std::uint64_t seed,
                                std::size_t threads = 1);

}  // namespace teamquant
