#include "teamquant/gaussian.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>
#include <mutex>

#include "teamquant/errors.hpp"

namespace teamquant {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// x * phi(x), taking the limit 0 at infinity.
double x_pdf(double x) {
  if (std::isinf(x)) return 0.0;
  return x * std_normal_pdf(x);
}

// Normalized probabilists' Hermite h_n = He_n / sqrt(n!) and h_{n-1} at x.
std::pair<double, double> hermite_pair(std::size_t n, double x) {
  double prev = 0.0;
  double cur = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) /
                        std::sqrt(static_cast<double>(k + 1));
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

GaussHermiteRule build_rule(std::size_t n) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k < n; ++k) {
    const double b = std::sqrt(static_cast<double>(k));
    jacobi(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = b;
    jacobi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);

  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = solver.eigenvalues()(static_cast<Eigen::Index>(i));
    for (int it = 0; it < 4; ++it) {
      const auto [h, hm1] = hermite_pair(n, x);
      const double dh = std::sqrt(dn) * hm1;
      if (dh == 0.0) break;
      x -= h / dh;
    }
    const auto [h, hm1] = hermite_pair(n, x);
    (void)h;
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / (dn * hm1 * hm1);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  double total = 0.0;
  for (double w : rule.weights) total += w;
  for (double& w : rule.weights) w /= total;
  return rule;
}

}  // namespace

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) {
  if (std::isnan(x)) return x;
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

double std_normal_mass(double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  if (lo >= 0.0) {
    // Both ends in the upper half: difference of upper tails.
    return 0.5 * (std::erfc(lo * kInvSqrt2) - std::erfc(hi * kInvSqrt2));
  }
  if (hi <= 0.0) {
    return 0.5 * (std::erfc(-hi * kInvSqrt2) - std::erfc(-lo * kInvSqrt2));
  }
  return 1.0 - 0.5 * std::erfc(hi * kInvSqrt2) - 0.5 * std::erfc(-lo * kInvSqrt2);
}

TruncatedMoments truncated_moments(const Interval& iv) {
  TruncatedMoments tm;
  tm.mass = std_normal_mass(iv.lo, iv.hi);
  const double pdf_lo = std::isinf(iv.lo) ? 0.0 : std_normal_pdf(iv.lo);
  const double pdf_hi = std::isinf(iv.hi) ? 0.0 : std_normal_pdf(iv.hi);
  tm.m1 = pdf_lo - pdf_hi;
  tm.m2 = tm.mass + x_pdf(iv.lo) - x_pdf(iv.hi);
  if (tm.m2 < 0.0) tm.m2 = 0.0;
  return tm;
}

const GaussHermiteRule& gauss_hermite(std::size_t nodes) {
  if (nodes == 0 || nodes > 512) {
    throw Error(ErrorKind::InvalidParameter,
                "Gauss-Hermite node count must be in [1, 512], got " + std::to_string(nodes));
  }
  static std::mutex mutex;
  static std::map<std::size_t, GaussHermiteRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(nodes);
  if (it == cache.end()) it = cache.emplace(nodes, build_rule(nodes)).first;
  return it->second;
}

double gauss_expect(const std::function<double(double)>& g, std::size_t nodes) {
  const auto& rule = gauss_hermite(nodes);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = g(rule.nodes[i]);
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::NonFiniteValue,
                  "integrand not finite at node " + std::to_string(rule.nodes[i]));
    }
    sum += rule.weights[i] * v;
  }
  return sum;
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::UnsupportedKernel: return "UnsupportedKernel";
    case ErrorKind::UnsupportedVariance: return "UnsupportedVariance";
    case ErrorKind::NonFiniteCost: return "NonFiniteCost";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

}  // namespace teamquant
