#include "teamquant/team_model.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "teamquant/errors.hpp"

namespace teamquant {

namespace {

// Largest exponent with a finite exp().
const double kMaxExponent = std::log(std::numeric_limits<double>::max());

struct BlockStats {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double v) {
    ++count;
    const double delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean);
  }

  void merge(const BlockStats& other) {
    if (other.count == 0) return;
    const double n = static_cast<double>(count);
    const double m = static_cast<double>(other.count);
    const double delta = other.mean - mean;
    mean += delta * m / (n + m);
    m2 += other.m2 + delta * delta * n * m / (n + m);
    count += other.count;
  }
};

template <typename SampleCost>
McEstimate run_blocks(std::size_t samples, std::uint64_t seed, std::size_t threads,
                      SampleCost&& sample_cost) {
  if (samples < 2) throw Error(ErrorKind::InvalidParameter, "Monte Carlo needs >= 2 samples");
  const std::size_t blocks = (samples + kSampleBlock - 1) / kSampleBlock;
  std::vector<BlockStats> stats(blocks);
  parallel_for(blocks, threads, [&](std::size_t b) {
    Rng rng(seed, b);
    const std::size_t count = std::min(kSampleBlock, samples - b * kSampleBlock);
    for (std::size_t i = 0; i < count; ++i) {
      const double c = sample_cost(rng);
      if (!std::isfinite(c)) {
        throw Error(ErrorKind::NonFiniteCost, "sampled cost is not finite");
      }
      stats[b].push(c);
    }
  });
  BlockStats total;
  for (const auto& s : stats) total.merge(s);
  const double n = static_cast<double>(total.count);
  const double variance = total.m2 / (n - 1.0);
  return {total.mean, 1.96 * std::sqrt(variance / n), total.count};
}

}  // namespace

ObservationKernel ObservationKernel::make_gaussian(MeanSource source, std::size_t agent,
                                                   double noise_sd) {
  ObservationKernel k;
  k.gaussian = GaussianObservation{source, agent, noise_sd};
  k.sample = [source, agent, noise_sd](Rng& rng, std::span<const double> x,
                                       std::span<const double> u) {
    double mean = 0.0;
    if (source == MeanSource::State) mean = x[0];
    if (source == MeanSource::Agent) mean = u[agent];
    return mean + noise_sd * rng.normal();
  };
  return k;
}

double gaussian_density_factor(double u, double y) {
  const double exponent = y * u - 0.5 * u * u;
  if (!(exponent <= kMaxExponent)) {
    throw Error(ErrorKind::Overflow, "density factor exponent " + std::to_string(exponent) +
                                         " exceeds double range");
  }
  return std::exp(exponent);
}

double ReducedTeam::density_product(std::span<const double> x, std::span<const double> y,
                                    std::span<const double> u) const {
  double product = 1.0;
  for (std::size_t i = 0; i < density_factors.size(); ++i) {
    product *= density_factors[i](x, u.first(i), y[i]);
  }
  return product;
}

double ReducedTeam::reduced_cost(std::span<const double> x, std::span<const double> y,
                                 std::span<const double> u) const {
  return problem.cost(x, y, u) * density_product(x, y, u);
}

ReducedTeam static_reduce(const TeamProblem& problem) {
  ReducedTeam reduced;
  reduced.problem = problem;
  for (std::size_t i = 0; i < problem.num_agents; ++i) {
    const auto& kernel = problem.kernels.at(i);
    const std::string who = "agent " + std::to_string(i + 1);
    if (!kernel.gaussian) {
      throw Error(ErrorKind::UnsupportedKernel, who + " has no Gaussian kernel description");
    }
    const GaussianObservation g = *kernel.gaussian;
    if (g.noise_sd != 1.0) {
      throw Error(ErrorKind::UnsupportedKernel, who + " has non-unit observation noise");
    }
    switch (g.source) {
      case MeanSource::Exogenous:
        reduced.density_factors.emplace_back(
            [](std::span<const double>, std::span<const double>, double) { return 1.0; });
        break;
      case MeanSource::State:
        if (problem.state_dim != 1) {
          throw Error(ErrorKind::UnsupportedKernel, who + " observes a non-scalar state");
        }
        reduced.density_factors.emplace_back(
            [](std::span<const double> x, std::span<const double>, double y) {
              return gaussian_density_factor(x[0], y);
            });
        break;
      case MeanSource::Agent:
        if (g.agent >= i) {
          throw Error(ErrorKind::UnsupportedKernel, who + " depends on a later agent");
        }
        reduced.density_factors.emplace_back(
            [k = g.agent](std::span<const double>, std::span<const double> u, double y) {
              return gaussian_density_factor(u[k], y);
            });
        break;
    }
    reduced.observations.push_back(g);
  }
  return reduced;
}

McEstimate eval_cost_dynamic_mc(const TeamProblem& problem, const ContinuousPolicy& policy,
                                std::size_t samples, std::uint64_t seed, std::size_t threads) {
  const std::size_t n = problem.num_agents;
  if (policy.size() != n) throw Error(ErrorKind::InvalidParameter, "policy/agent count mismatch");
  return run_blocks(samples, seed, threads, [&](Rng& rng) {
    std::vector<double> x(problem.state_dim), y(n), u(n);
    if (problem.state_dim > 0) problem.state_sampler(rng, x);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = problem.kernels[i].sample(rng, x, std::span<const double>(u).first(i));
      u[i] = policy[i](y[i]);
    }
    return problem.cost(x, y, u);
  });
}

McEstimate eval_cost_reduced_mc(const ReducedTeam& reduced, const ContinuousPolicy& policy,
                                std::size_t samples, std::uint64_t seed, std::size_t threads) {
  const auto& problem = reduced.problem;
  const std::size_t n = problem.num_agents;
  if (policy.size() != n) throw Error(ErrorKind::InvalidParameter, "policy/agent count mismatch");
  return run_blocks(samples, seed, threads, [&](Rng& rng) {
    std::vector<double> x(problem.state_dim), y(n), u(n);
    if (problem.state_dim > 0) problem.state_sampler(rng, x);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.normal();
      u[i] = policy[i](y[i]);
    }
    return reduced.reduced_cost(x, y, u);
  });
}

}  // namespace teamquant
