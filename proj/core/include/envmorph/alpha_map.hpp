#pragma once

#include <functional>
#include <string>

namespace envmorph {

/// Monotone reparameterization of the morph weight with fixed endpoints.
class AlphaMap {
 public:
  /// Identity.
  AlphaMap();
  /// Throws InvalidMap unless Map(0) = 0, Map(1) = 1 and the function is
  /// nondecreasing on a 101-point grid.
  AlphaMap(std::function<double(double)> fn, std::string description);

  /// "identity", "gamma:<p>" or "pwl:x0:y0,x1:y1,..." (knots sorted by x,
  /// first knot (0,0), last knot (1,1)).
  static AlphaMap parse(const std::string& text);

  double operator()(double alpha) const;
  const std::string& description() const noexcept { return description_; }
  bool is_identity() const noexcept { return !fn_; }

 private:
  std::function<double(double)> fn_;
  std::string description_ = "identity";
};

/// Throws InvalidArgument unless alpha lies in [0, 1].
double apply_alpha_map(const AlphaMap& map, double alpha);

}  // namespace envmorph
