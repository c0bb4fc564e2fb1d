#pragma once

#include <cstddef>
#include <vector>

#include "teamquant/gaussian.hpp"

namespace teamquant {

struct QuantizedValue {
  std::size_t index = 0;  ///< 0 is the overflow symbol, 1..n the cells
  double level = 0.0;
};

/// Uniform quantizer on [-radius, radius) with n half-open cells of width
/// 2*radius/n. Inputs outside the granular region map to the overflow symbol
/// (index 0, level 0).
class Quantizer {
 public:
  Quantizer(double radius, std::size_t n);

  double radius() const { return radius_; }
  std::size_t n() const { return n_; }
  double cell_width() const { return width_; }
  double overflow_level() const { return 0.0; }

  /// Cell midpoints y_1..y_n.
  const std::vector<double>& levels() const { return levels_; }
  /// Cell j (0-based) is [edges[j], edges[j+1]).
  Interval cell(std::size_t j) const { return {edges_[j], edges_[j + 1]}; }

  /// Symbol count including overflow: n + 1.
  std::size_t symbol_count() const { return n_ + 1; }
  /// Representative value of symbol s (s = 0 is overflow).
  double symbol_level(std::size_t s) const { return s == 0 ? 0.0 : levels_[s - 1]; }
  /// Preimage of symbol s: one cell, or the two tails for the overflow symbol.
  std::vector<Interval> symbol_intervals(std::size_t s) const;

  QuantizedValue quantize(double y) const;

  /// Mass of every symbol under N(0, scale^2); entry 0 is both tails combined.
  std::vector<double> cell_masses(double scale) const;

 private:
  double radius_;
  std::size_t n_;
  double width_;
  std::vector<double> edges_;
  std::vector<double> levels_;
};

inline Quantizer make_uniform_quantizer(double radius, std::size_t n) { return {radius, n}; }

/// Finite action set inside [-half_width, half_width].
class ActionGrid {
 public:
  /// nested = false: k midpoints of the uniform k-cell partition of [-m, m].
  /// nested = true: dyadic points -m + j*2m/2^t, j = 0..2^t, for the smallest
  /// t >= 1 with 2^t + 1 >= k. Refining doubles 2^t, so the parent grid stays
  /// a subset.
  ActionGrid(double half_width, std::size_t k, bool nested);

  double half_width() const { return half_width_; }
  std::size_t requested_k() const { return k_; }
  bool nested() const { return nested_; }
  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

  /// Grid point closest to u; ties go to the smaller point.
  double nearest(double u) const;
  std::size_t nearest_index(double u) const;

  /// Dyadic refinement with twice as many intervals (nested grids only).
  ActionGrid refine() const;

 private:
  double half_width_;
  std::size_t k_;
  bool nested_;
  std::vector<double> points_;
};

inline ActionGrid make_action_grid(double m, std::size_t k, bool nested) { return {m, k, nested}; }

inline double nearest_grid_point(const ActionGrid& g, double u) { return g.nearest(u); }

}  // namespace teamquant
