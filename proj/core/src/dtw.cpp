#include "envmorph/dtw.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "envmorph/errors.hpp"
#include "envmorph/neural/models.hpp"

namespace envmorph {

bool WarpPath::valid(std::size_t n, std::size_t m) const noexcept {
  if (points.empty() || n == 0 || m == 0) return false;
  if (points.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
  if (points.back() != std::pair<std::size_t, std::size_t>{n - 1, m - 1}) return false;
  for (std::size_t k = 1; k < points.size(); ++k) {
    const auto [pi, pj] = points[k - 1];
    const auto [i, j] = points[k];
    if (i < pi || j < pj) return false;
    const std::size_t di = i - pi, dj = j - pj;
    if (di > 1 || dj > 1 || di + dj == 0) return false;
  }
  return true;
}

DtwResult dtw(std::span<const float> a, std::span<const float> b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0) throw InvalidArgument("dtw: empty sequence");
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> acc(n * m, inf);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return acc[i * m + j]; };
  auto local = [&](std::size_t i, std::size_t j) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[j]);
    return d * d;
  };

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = inf;
        if (i > 0 && j > 0) best = at(i - 1, j - 1);
        if (i > 0) best = std::min(best, at(i - 1, j));
        if (j > 0) best = std::min(best, at(i, j - 1));
      }
      at(i, j) = best + local(i, j);
    }
  }

  DtwResult out;
  out.cost = at(n - 1, m - 1);
  std::size_t i = n - 1, j = m - 1;
  out.path.points.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = at(i - 1, j - 1), up = at(i - 1, j), left = at(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    out.path.points.emplace_back(i, j);
  }
  std::reverse(out.path.points.begin(), out.path.points.end());
  return out;
}

WarpPath dtw_path(const Envelope& a, const Envelope& b) { return dtw(a.frames(), b.frames()).path; }

double path_cost(const WarpPath& path, std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (const auto& [i, j] : path.points) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[j]);
    sum += d * d;
  }
  return sum;
}

Envelope dtw_morph(const Envelope& a, const Envelope& b, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("dtw_morph: alpha must lie in [0, 1]");
  return dtw_morph(a, b, alpha, dtw_path(a, b));
}

Envelope dtw_morph(const Envelope& a, const Envelope& b, double alpha, const WarpPath& path) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("dtw_morph: alpha must lie in [0, 1]");
  if (!path.valid(kFrames, kFrames)) throw InvalidArgument("dtw_morph: invalid warp path");
  const auto w = mix_weights(alpha);

  // Path points are visited in order of nondecreasing t, so equal positions
  // are adjacent.
  std::vector<double> ts, vs;
  ts.reserve(path.points.size());
  vs.reserve(path.points.size());
  double sum = 0.0;
  std::size_t run = 0;
  for (const auto& [i, j] : path.points) {
    const double t = w.first * static_cast<double>(i) + w.second * static_cast<double>(j);
    const double v = w.first * static_cast<double>(a[i]) + w.second * static_cast<double>(b[j]);
    if (run > 0 && t == ts.back()) {
      sum += v;
      ++run;
      vs.back() = sum / static_cast<double>(run);
    } else {
      ts.push_back(t);
      vs.push_back(v);
      sum = v;
      run = 1;
    }
  }

  std::array<double, kFrames> out{};
  std::size_t p = 0;
  for (std::size_t k = 0; k < kFrames; ++k) {
    const double x = static_cast<double>(k);
    if (x <= ts.front()) {
      out[k] = vs.front();
      continue;
    }
    if (x >= ts.back()) {
      out[k] = vs.back();
      continue;
    }
    while (ts[p + 1] < x) ++p;
    if (ts[p + 1] == x) {
      out[k] = vs[p + 1];
    } else {
      const double f = (x - ts[p]) / (ts[p + 1] - ts[p]);
      out[k] = vs[p] + (vs[p + 1] - vs[p]) * f;
    }
  }
  return Envelope::clamped(std::span<const double>(out));
}

}  // namespace envmorph
