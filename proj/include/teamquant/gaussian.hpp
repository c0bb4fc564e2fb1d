#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace teamquant {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Half-open interval [lo, hi); either end may be infinite.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double y) const { return y >= lo && y < hi; }
  bool operator==(const Interval&) const = default;
};

/// Unnormalized raw moments of N(0,1) restricted to an interval.
struct TruncatedMoments {
  double mass = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
};

double std_normal_pdf(double x);

/// Phi(x), computed from erfc so both tails keep full relative accuracy.
double std_normal_cdf(double x);

/// Phi(hi) - Phi(lo) without cancellation in the upper tail.
double std_normal_mass(double lo, double hi);

TruncatedMoments truncated_moments(const Interval& iv);

/// Probabilists' Gauss-Hermite rule normalized so that the weights sum to 1,
/// i.e. sum_k w_k g(x_k) approximates E[g(Y)] for Y ~ N(0,1).
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes from the eigenvalues of the Hermite Jacobi matrix (Golub-Welsch),
/// polished by Newton iteration on the three-term recurrence. Cached per size.
const GaussHermiteRule& gauss_hermite(std::size_t nodes);

/// Fixed-node estimate of E[g(Y)], Y ~ N(0,1). Throws NonFiniteValue if g is
/// not finite at a node.
double gauss_expect(const std::function<double(double)>& g, std::size_t nodes);

}  // namespace teamquant
