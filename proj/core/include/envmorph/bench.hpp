#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "envmorph/alpha_map.hpp"
#include "envmorph/dataset.hpp"
#include "envmorph/engines.hpp"
#include "envmorph/synthgen.hpp"

namespace envmorph {

enum class SuiteKind { SingleAxis, Compositional, Naturalistic };

std::string suite_name(SuiteKind kind);  // "single-axis", "compositional", "naturalistic"
SuiteKind parse_suite_kind(const std::string& text);
SeedStream suite_stream(SuiteKind kind) noexcept;
/// Default combos: the four single axes, or the eleven multi-axis sets.
std::vector<AxisFlags> default_combos(SuiteKind kind);

inline constexpr const char* kOracleEngine = "oracle";

struct SuiteConfig {
  SuiteKind kind = SuiteKind::SingleAxis;
  std::size_t count = 1000;  // tuples per cell
  std::vector<AxisFlags> combos;  // empty: default_combos(kind)
  std::uint64_t seed = 0;
  /// Engine names ("audio-mix", "embed-mix", "dtw", "learned", "oracle").
  std::vector<std::string> engines;
  std::filesystem::path autoencoder_path;
  std::filesystem::path mapper_path;
  /// Naturalistic only; empty means the bundled templates.
  std::vector<TemplateKernel> templates;
  AlphaSampling alpha = AlphaSampling::Continuous;
  AlphaMap alpha_map;

  void validate() const;
  std::vector<AxisFlags> effective_combos() const;
};

/// A benchmark engine: maps a tuple to a predicted morph.
struct BenchEngine {
  std::string name;
  std::function<std::vector<Envelope>(std::span<const MorphTuple>)> run;
};

BenchEngine oracle_engine();
BenchEngine make_bench_engine(const MorphEngine& engine);

struct CellStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::size_t count = 0;
};

struct BenchmarkResult {
  SuiteKind kind = SuiteKind::SingleAxis;
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::string alpha_sampling = "continuous";
  std::string alpha_map = "identity";
  std::vector<std::string> engines;
  std::vector<std::string> combos;
  /// cells[engine][combo]
  std::map<std::string, std::map<std::string, CellStats>> cells;
  std::map<std::string, double> overall;  // mean over every tuple of every cell

  const CellStats& cell(const std::string& engine, const std::string& combo) const;
  /// Config echo, per-cell statistics, overall means and a content-derived
  /// run id.
  std::string to_json() const;
  std::string run_id() const;

  friend bool operator==(const BenchmarkResult&, const BenchmarkResult&);
};

/// Held-out tuple `index` of a suite cell; seeds come from the suite's
/// evaluation stream, which never overlaps the training streams.
MorphTuple suite_tuple(const SuiteConfig& cfg, const AxisFlags& combo, std::size_t index,
                       std::span<const TemplateKernel> templates);

/// Loads checkpoints as needed and evaluates every engine on every tuple.
/// Throws CheckpointMissing, TemplateMissing or GenerationExhausted.
BenchmarkResult run_suite(const SuiteConfig& cfg);
/// Same, with explicit engines (used for the oracle and for tests).
BenchmarkResult run_suite(const SuiteConfig& cfg, const std::vector<BenchEngine>& engines);

enum class TableFormat { Markdown, Csv };

/// Rows are axis combinations plus an "overall" row, columns are engines;
/// means rounded half-even to 3 decimals. Markdown bolds the row minimum
/// (leftmost on ties).
std::string emit_table(const BenchmarkResult& result, TableFormat format);

/// Index of the engine holding the minimum of each row (same order as the
/// table rows).
std::vector<std::size_t> row_minima(const BenchmarkResult& result);

struct ExpectationVerdict {
  std::string text;
  bool passed = false;
  std::string detail;
};

/// One inequality per line: `cell(engine, combo) < cell(engine, combo)`,
/// `<=` also accepted, `overall(engine)` on either side. `*` as an engine
/// expands to every engine except the other side's; `*` as a combo expands
/// to every combo, bound to the same combo on both sides. Blank lines and
/// `#` comments are ignored. Throws InvalidExpectation on syntax errors or
/// references to missing cells.
std::vector<ExpectationVerdict> check_orderings(const BenchmarkResult& result, const std::string& expectations);

}  // namespace envmorph
