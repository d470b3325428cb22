#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "envmorph/envelope.hpp"

namespace envmorph {

/// Monotone alignment from (0, 0) to (N-1, M-1) with steps (1,0), (0,1), (1,1).
struct WarpPath {
  std::vector<std::pair<std::size_t, std::size_t>> points;

  /// Checks boundary, monotonicity and step-set membership for sequences of
  /// lengths n and m.
  bool valid(std::size_t n, std::size_t m) const noexcept;
};

struct DtwResult {
  WarpPath path;
  double cost = 0.0;
};

/// Squared-difference DTW without a window. Backtracking prefers the
/// diagonal predecessor, then (i-1, j), then (i, j-1) on ties.
DtwResult dtw(std::span<const float> a, std::span<const float> b);

WarpPath dtw_path(const Envelope& a, const Envelope& b);

/// Sum of squared differences along the path, accumulated in path order.
double path_cost(const WarpPath& path, std::span<const float> a, std::span<const float> b);

/// Interpolates positions and values along the optimal path and resamples
/// the result onto the frame grid.
Envelope dtw_morph(const Envelope& a, const Envelope& b, double alpha);
Envelope dtw_morph(const Envelope& a, const Envelope& b, double alpha, const WarpPath& path);

}  // namespace envmorph
