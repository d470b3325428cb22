#include <cmath>
#include <cstdio>
#include <sstream>

#include "envmorph/bench.hpp"
#include "envmorph/errors.hpp"

namespace envmorph {
namespace {

constexpr const char* kOverallRow = "overall";

// Half-even rounding to 3 decimals (nearbyint uses the default
// round-to-nearest-even mode).
std::string format3(double v) {
  const double r = std::nearbyint(v * 1000.0) / 1000.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", r);
  return buf;
}

std::vector<std::string> row_names(const BenchmarkResult& r) {
  auto rows = r.combos;
  rows.emplace_back(kOverallRow);
  return rows;
}

double value(const BenchmarkResult& r, const std::string& engine, const std::string& row) {
  return row == kOverallRow ? r.overall.at(engine) : r.cell(engine, row).mean;
}

}  // namespace

std::vector<std::size_t> row_minima(const BenchmarkResult& result) {
  std::vector<std::size_t> out;
  for (const auto& row : row_names(result)) {
    std::size_t best = 0;
    for (std::size_t e = 1; e < result.engines.size(); ++e) {
      if (value(result, result.engines[e], row) < value(result, result.engines[best], row)) best = e;
    }
    out.push_back(best);
  }
  return out;
}

std::string emit_table(const BenchmarkResult& result, TableFormat format) {
  if (result.engines.empty() || result.combos.empty()) throw InvalidArgument("emit_table: empty result");
  const auto rows = row_names(result);
  const auto best = row_minima(result);
  std::ostringstream out;
  if (format == TableFormat::Csv) {
    out << "combo";
    for (const auto& e : result.engines) out << ',' << e;
    out << '\n';
    for (const auto& row : rows) {
      out << row;
      for (const auto& e : result.engines) out << ',' << format3(value(result, e, row));
      out << '\n';
    }
    return out.str();
  }

  out << "| combo |";
  for (const auto& e : result.engines) out << ' ' << e << " |";
  out << "\n|---|";
  for (std::size_t e = 0; e < result.engines.size(); ++e) out << "---:|";
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out << "| " << rows[r] << " |";
    for (std::size_t e = 0; e < result.engines.size(); ++e) {
      const auto text = format3(value(result, result.engines[e], rows[r]));
      out << ' ' << (e == best[r] ? "**" + text + "**" : text) << " |";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace envmorph
