#include "teamquant/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "teamquant/errors.hpp"

namespace teamquant {

Quantizer::Quantizer(double radius, std::size_t n) : radius_(radius), n_(n) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorKind::InvalidParameter, "quantizer radius must be positive and finite");
  }
  if (n == 0) throw Error(ErrorKind::InvalidParameter, "quantizer needs at least one level");
  width_ = 2.0 * radius / static_cast<double>(n);
  edges_.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) edges_[j] = -radius + static_cast<double>(j) * width_;
  edges_[n] = radius;
  levels_.resize(n);
  for (std::size_t j = 0; j < n; ++j) levels_[j] = 0.5 * (edges_[j] + edges_[j + 1]);
}

std::vector<Interval> Quantizer::symbol_intervals(std::size_t s) const {
  if (s == 0) return {{-kInf, -radius_}, {radius_, kInf}};
  return {cell(s - 1)};
}

QuantizedValue Quantizer::quantize(double y) const {
  if (!(y >= -radius_ && y < radius_)) return {0, 0.0};
  auto j = static_cast<std::size_t>(
      std::clamp(std::floor((y + radius_) / width_), 0.0, static_cast<double>(n_ - 1)));
  // The floor can land one cell off near an edge; the stored edges decide.
  while (j + 1 < n_ && y >= edges_[j + 1]) ++j;
  while (j > 0 && y < edges_[j]) --j;
  return {j + 1, levels_[j]};
}

std::vector<double> Quantizer::cell_masses(double scale) const {
  if (!(scale > 0.0)) throw Error(ErrorKind::InvalidParameter, "scale must be positive");
  std::vector<double> masses(n_ + 1);
  masses[0] = 2.0 * std_normal_cdf(-radius_ / scale);
  for (std::size_t j = 0; j < n_; ++j) {
    masses[j + 1] = std_normal_mass(edges_[j] / scale, edges_[j + 1] / scale);
  }
  return masses;
}

ActionGrid::ActionGrid(double half_width, std::size_t k, bool nested)
    : half_width_(half_width), k_(k), nested_(nested) {
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw Error(ErrorKind::InvalidParameter, "action grid half-width must be positive");
  }
  if (k == 0) throw Error(ErrorKind::InvalidParameter, "action grid needs at least one point");
  if (nested) {
    std::size_t intervals = 2;
    while (intervals + 1 < k) intervals *= 2;
    const double step = 2.0 * half_width / static_cast<double>(intervals);
    points_.resize(intervals + 1);
    for (std::size_t j = 0; j <= intervals; ++j) {
      points_[j] = -half_width + static_cast<double>(j) * step;
    }
    points_[intervals / 2] = 0.0;
    points_[intervals] = half_width;
  } else {
    const double step = 2.0 * half_width / static_cast<double>(k);
    points_.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      points_[j] = -half_width + (static_cast<double>(j) + 0.5) * step;
    }
    if (k % 2 == 1) points_[k / 2] = 0.0;
  }
}

std::size_t ActionGrid::nearest_index(double u) const {
  const auto it = std::lower_bound(points_.begin(), points_.end(), u);
  if (it == points_.begin()) return 0;
  if (it == points_.end()) return points_.size() - 1;
  const auto hi = static_cast<std::size_t>(it - points_.begin());
  // Tie (equal distance) resolves to the smaller point.
  return (u - points_[hi - 1] <= points_[hi] - u) ? hi - 1 : hi;
}

double ActionGrid::nearest(double u) const { return points_[nearest_index(u)]; }

ActionGrid ActionGrid::refine() const {
  if (!nested_) throw Error(ErrorKind::InvalidParameter, "only nested grids can be refined");
  return ActionGrid(half_width_, 2 * (points_.size() - 1) + 1, true);
}

}  // namespace teamquant
