#include "envmorph/alpha_map.hpp"

#include <cmath>
#include <sstream>
#include <utility>
#include <vector>

#include "envmorph/errors.hpp"

namespace envmorph {
namespace {

constexpr int kProbePoints = 101;

double parse_number(const std::string& text, const std::string& spec) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InvalidMap("alpha map: bad number '" + text + "' in '" + spec + "'");
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw InvalidMap("alpha map: bad number '" + text + "' in '" + spec + "'");
  }
  return v;
}

AlphaMap piecewise_linear(const std::string& body, const std::string& spec) {
  std::vector<std::pair<double, double>> knots;
  std::stringstream in(body);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw InvalidMap("alpha map: knot needs x:y in '" + spec + "'");
    knots.emplace_back(parse_number(item.substr(0, colon), spec), parse_number(item.substr(colon + 1), spec));
  }
  if (knots.size() < 2) throw InvalidMap("alpha map: pwl needs at least two knots");
  if (knots.front().first != 0.0 || knots.back().first != 1.0) {
    throw InvalidMap("alpha map: pwl knots must span x = 0 to x = 1");
  }
  for (std::size_t k = 1; k < knots.size(); ++k) {
    if (!(knots[k].first > knots[k - 1].first)) throw InvalidMap("alpha map: pwl x values must increase");
  }
  auto fn = [knots](double x) {
    std::size_t k = 1;
    while (k + 1 < knots.size() && knots[k].first < x) ++k;
    const auto [x0, y0] = knots[k - 1];
    const auto [x1, y1] = knots[k];
    if (x == x1) return y1;
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  };
  return AlphaMap(fn, spec);
}

}  // namespace

AlphaMap::AlphaMap() = default;

AlphaMap::AlphaMap(std::function<double(double)> fn, std::string description)
    : fn_(std::move(fn)), description_(std::move(description)) {
  if (!fn_) throw InvalidMap("alpha map: empty function");
  if (fn_(0.0) != 0.0 || fn_(1.0) != 1.0) {
    throw InvalidMap("alpha map '" + description_ + "' must map 0 to 0 and 1 to 1");
  }
  double prev = 0.0;
  for (int k = 0; k < kProbePoints; ++k) {
    const double y = fn_(static_cast<double>(k) / (kProbePoints - 1));
    if (!std::isfinite(y) || y < prev || y < 0.0 || y > 1.0) {
      throw InvalidMap("alpha map '" + description_ + "' is not monotone within [0, 1]");
    }
    prev = y;
  }
}

AlphaMap AlphaMap::parse(const std::string& text) {
  if (text.empty() || text == "identity") return AlphaMap();
  if (text.rfind("gamma:", 0) == 0) {
    const double p = parse_number(text.substr(6), text);
    if (!(p > 0.0)) throw InvalidMap("alpha map: gamma exponent must be positive");
    return AlphaMap([p](double x) { return std::pow(x, p); }, text);
  }
  if (text.rfind("pwl:", 0) == 0) return piecewise_linear(text.substr(4), text);
  throw InvalidMap("alpha map: unknown form '" + text + "'");
}

double AlphaMap::operator()(double alpha) const { return fn_ ? fn_(alpha) : alpha; }

double apply_alpha_map(const AlphaMap& map, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  return map(alpha);
}

}  // namespace envmorph
