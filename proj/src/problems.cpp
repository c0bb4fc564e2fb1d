#include "teamquant/problems.hpp"

#include <cmath>

#include "teamquant/errors.hpp"

namespace teamquant {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::InvalidParameter, what);
}

std::function<void(Rng&, std::span<double>)> gaussian_state(double sd) {
  return [sd](Rng& rng, std::span<double> x) { x[0] = sd * rng.normal(); };
}

}  // namespace

std::string problem_name(const ProblemSpec& spec) {
  struct {
    std::string operator()(const WitsenhausenSpec&) const { return "witsenhausen"; }
    std::string operator()(const RelaySpec&) const { return "relay"; }
    std::string operator()(const RadnerSpec&) const { return "radner"; }
  } visitor;
  return std::visit(visitor, spec);
}

void validate(const ProblemSpec& spec) {
  if (const auto* w = std::get_if<WitsenhausenSpec>(&spec)) {
    require(w->weight > 0.0 && std::isfinite(w->weight), "witsenhausen weight must be > 0");
  } else if (const auto* r = std::get_if<RelaySpec>(&spec)) {
    require(r->num_agents >= 2, "relay needs at least two agents");
    require(r->weights.size() == r->num_agents - 1, "relay needs num_agents - 1 weights");
    for (double l : r->weights) require(l >= 0.0 && std::isfinite(l), "relay weights must be >= 0");
    require(r->state_sd > 0.0 && r->noise_sd > 0.0, "relay variances must be positive");
  } else if (const auto* q = std::get_if<RadnerSpec>(&spec)) {
    require(q->r > 0.0 && std::isfinite(q->r), "radner r must be > 0");
  }
}

TeamProblem make_witsenhausen(const WitsenhausenSpec& spec) {
  validate(spec);
  const double weight = spec.weight;
  TeamProblem p;
  p.name = "witsenhausen";
  p.num_agents = 2;
  p.state_dim = 0;
  p.kernels = {ObservationKernel::make_gaussian(MeanSource::Exogenous, 0, 1.0),
               ObservationKernel::make_gaussian(MeanSource::Agent, 0, 1.0)};
  p.cost = [weight](std::span<const double>, std::span<const double> y,
                    std::span<const double> u) {
    const double a = u[0] - y[0];
    const double b = u[1] - u[0];
    return weight * a * a + b * b;
  };
  p.stage_costs = {
      [weight](double, double y, double, double u) { return weight * (u - y) * (u - y); },
      [](double, double, double u_prev, double u) { return (u - u_prev) * (u - u_prev); },
  };
  return p;
}

TeamProblem make_relay(const RelaySpec& spec) {
  validate(spec);
  const std::size_t n = spec.num_agents;
  TeamProblem p;
  p.name = "relay";
  p.num_agents = n;
  p.state_dim = 1;
  p.state_sd = spec.state_sd;
  p.state_sampler = gaussian_state(spec.state_sd);
  p.kernels.push_back(ObservationKernel::make_gaussian(MeanSource::State, 0, spec.noise_sd));
  for (std::size_t i = 1; i < n; ++i) {
    p.kernels.push_back(ObservationKernel::make_gaussian(MeanSource::Agent, i - 1, spec.noise_sd));
  }
  const auto weights = spec.weights;
  p.cost = [weights, n](std::span<const double> x, std::span<const double>,
                        std::span<const double> u) {
    const double e = u[n - 1] - x[0];
    double c = e * e;
    for (std::size_t i = 0; i + 1 < n; ++i) c += weights[i] * u[i] * u[i];
    return c;
  };
  for (std::size_t i = 0; i + 1 < n; ++i) {
    p.stage_costs.push_back([l = weights[i]](double, double, double, double u) { return l * u * u; });
  }
  p.stage_costs.push_back([](double x, double, double, double u) { return (u - x) * (u - x); });
  return p;
}

TeamProblem make_radner(const RadnerSpec& spec) {
  validate(spec);
  const double r = spec.r;
  TeamProblem p;
  p.name = "radner";
  p.num_agents = 2;
  p.state_dim = 1;
  p.state_sampler = gaussian_state(1.0);
  p.kernels = {ObservationKernel::make_gaussian(MeanSource::State, 0, 1.0),
               ObservationKernel::make_gaussian(MeanSource::State, 0, 1.0)};
  p.cost = [r](std::span<const double> x, std::span<const double>, std::span<const double> u) {
    const double e = x[0] - u[0] - u[1];
    return e * e + r * (u[0] * u[0] + u[1] * u[1]);
  };
  p.stage_costs = {
      [r](double, double, double, double u) { return r * u * u; },
      [r](double x, double, double u_prev, double u) {
        const double e = x - u_prev - u;
        return e * e + r * u * u;
      },
  };
  p.is_static = true;
  return p;
}

TeamProblem make_problem(const ProblemSpec& spec) {
  struct {
    TeamProblem operator()(const WitsenhausenSpec& s) const { return make_witsenhausen(s); }
    TeamProblem operator()(const RelaySpec& s) const { return make_relay(s); }
    TeamProblem operator()(const RadnerSpec& s) const { return make_radner(s); }
  } visitor;
  return std::visit(visitor, spec);
}

}  // namespace teamquant
