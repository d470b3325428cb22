#include <doctest.h>

#include <json.hpp>
#include <sstream>

#include "envmorph/bench.hpp"
#include "envmorph/dataset.hpp"
#include "envmorph/errors.hpp"

using namespace envmorph;

namespace {

SuiteConfig small_suite(SuiteKind kind, std::vector<std::string> engines, std::size_t count = 6) {
  SuiteConfig cfg;
  cfg.kind = kind;
  cfg.count = count;
  cfg.engines = std::move(engines);
  return cfg;
}

BenchmarkResult hand_result(const std::vector<std::pair<std::string, std::vector<double>>>& columns,
                            const std::vector<std::string>& combos) {
  BenchmarkResult r;
  r.combos = combos;
  for (const auto& [engine, values] : columns) {
    r.engines.push_back(engine);
    double sum = 0.0;
    for (std::size_t c = 0; c < combos.size(); ++c) {
      r.cells[engine][combos[c]] = CellStats{values[c], 0.0, 1};
      sum += values[c];
    }
    r.overall[engine] = sum / static_cast<double>(combos.size());
  }
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("suite names and defaults") {
  for (auto k : {SuiteKind::SingleAxis, SuiteKind::Compositional, SuiteKind::Naturalistic}) {
    CHECK(parse_suite_kind(suite_name(k)) == k);
  }
  CHECK_THROWS_AS(parse_suite_kind("mixed"), InvalidArgument);
  CHECK(default_combos(SuiteKind::SingleAxis).size() == 4);
  CHECK(default_combos(SuiteKind::Compositional).size() == 11);
  CHECK(default_combos(SuiteKind::Naturalistic).size() == 4);

  auto cfg = small_suite(SuiteKind::SingleAxis, {"audio-mix"});
  cfg.count = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.count = 1;
  cfg.engines.clear();
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg.engines = {"audio-mix", "audio-mix"};
  CHECK_THROWS_AS(run_suite(cfg), InvalidArgument);
  cfg.engines = {"granular"};
  CHECK_THROWS_AS(run_suite(cfg), InvalidArgument);
}

TEST_CASE("oracle engine scores zero everywhere") {
  for (auto k : {SuiteKind::SingleAxis, SuiteKind::Compositional, SuiteKind::Naturalistic}) {
    const auto r = run_suite(small_suite(k, {kOracleEngine, "audio-mix"}, 3));
    for (const auto& combo : r.combos) {
      CHECK(r.cell(kOracleEngine, combo).mean == 0.0);
      CHECK(r.cell(kOracleEngine, combo).count == 3);
    }
    CHECK(r.overall.at(kOracleEngine) == 0.0);
    const auto verdicts = check_orderings(r, "cell(oracle, *) < cell(*, *)\noverall(oracle) <= overall(*)");
    REQUIRE(verdicts.size() == 2);
    CHECK(verdicts[0].passed);
    CHECK(verdicts[1].passed);
  }
}

TEST_CASE("audio mixing is near exact on the amplitude axis") {
  auto cfg = small_suite(SuiteKind::SingleAxis, {"audio-mix"}, 100);
  cfg.combos = {AxisFlags::parse("amplitude")};
  const auto r = run_suite(cfg);
  CHECK(r.cell("audio-mix", "amplitude").mean < 0.01);
  CHECK(r.cell("audio-mix", "amplitude").count == 100);
}

TEST_CASE("benchmark determinism and engine isolation") {
  const auto cfg = small_suite(SuiteKind::SingleAxis, {"audio-mix", "dtw"}, 4);
  const auto r1 = run_suite(cfg);
  const auto r2 = run_suite(cfg);
  CHECK(r1 == r2);
  CHECK(r1.to_json() == r2.to_json());
  CHECK(r1.run_id() == r2.run_id());

  const auto alone = run_suite(small_suite(SuiteKind::SingleAxis, {"audio-mix"}, 4));
  for (const auto& combo : alone.combos) {
    CHECK(alone.cell("audio-mix", combo).mean == r1.cell("audio-mix", combo).mean);
    CHECK(alone.cell("audio-mix", combo).std == r1.cell("audio-mix", combo).std);
  }
  CHECK(alone.overall.at("audio-mix") == r1.overall.at("audio-mix"));

  auto other_seed = cfg;
  other_seed.seed = 1;
  CHECK_FALSE(run_suite(other_seed) == r1);
}

TEST_CASE("evaluation seeds are disjoint from training seeds") {
  const auto cfg = small_suite(SuiteKind::SingleAxis, {"audio-mix"});
  for (const auto& combo : cfg.effective_combos()) {
    for (std::size_t i = 0; i < 20; ++i) {
      CHECK((suite_tuple(cfg, combo, i, {}).seed >> 56) == static_cast<std::uint64_t>(SeedStream::EvalSingleAxis));
    }
  }
  DatasetConfig train;
  train.count = 20;
  for (std::size_t i = 0; i < train.count; ++i) {
    CHECK((dataset_tuple(train, i).seed >> 56) == static_cast<std::uint64_t>(SeedStream::Dataset));
  }
  CHECK(suite_stream(SuiteKind::Compositional) == SeedStream::EvalCompositional);
  CHECK(suite_stream(SuiteKind::Naturalistic) == SeedStream::EvalNaturalistic);
}

TEST_CASE("suite tuples vary the requested axes") {
  const auto cfg = small_suite(SuiteKind::Compositional, {"audio-mix"});
  for (const auto& combo : cfg.effective_combos()) {
    const auto t = suite_tuple(cfg, combo, 0, {});
    CHECK(t.axes.flags() == combo);
  }
}

TEST_CASE("missing checkpoints are reported") {
  auto cfg = small_suite(SuiteKind::SingleAxis, {"learned"});
  cfg.autoencoder_path = "/nonexistent/ae.emck";
  cfg.mapper_path = "/nonexistent/m.emck";
  CHECK_THROWS_AS(run_suite(cfg), CheckpointMissing);
}

TEST_CASE("results json") {
  const auto r = run_suite(small_suite(SuiteKind::SingleAxis, {"audio-mix", kOracleEngine}, 2));
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["run_id"] == r.run_id());
  CHECK(j["config"]["suite"] == "single-axis");
  CHECK(j["config"]["count"] == 2);
  CHECK(j["cells"].size() == 8);
  for (const auto& c : j["cells"]) {
    CHECK(c["count"] == 2);
    CHECK(c["mean"].get<double>() == r.cell(c["engine"], c["combo"]).mean);
  }
  CHECK(j["overall"]["audio-mix"].get<double>() == r.overall.at("audio-mix"));
}

TEST_CASE("tables") {
  const auto r = hand_result({{"A", {0.5}}, {"B", {0.25}}}, {"placement"});
  const auto md = emit_table(r, TableFormat::Markdown);
  CHECK(md.find("| placement | 0.500 | **0.250** |") != std::string::npos);
  CHECK(row_minima(r) == std::vector<std::size_t>{1, 1});

  const auto tie = hand_result({{"A", {0.25}}, {"B", {0.25}}, {"C", {0.3}}}, {"spacing"});
  CHECK(emit_table(tie, TableFormat::Markdown).find("| spacing | **0.250** | 0.250 | 0.300 |") != std::string::npos);
  CHECK(row_minima(tie)[0] == 0);

  // Half-even at the third decimal on exactly representable values.
  const auto even = hand_result({{"A", {0.0625, 0.1875}}}, {"x", "y"});
  const auto csv = emit_table(even, TableFormat::Csv);
  CHECK(csv.find("x,0.062") != std::string::npos);
  CHECK(csv.find("y,0.188") != std::string::npos);

  const auto wide = hand_result({{"A", {0.1234, 0.5, 0.9}}, {"B", {0.2, 0.45678, 0.01}}}, {"p", "q", "s"});
  const auto rows = parse_csv(emit_table(wide, TableFormat::Csv));
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"combo", "A", "B"});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(rows[i + 1][0] == wide.combos[i]);
    for (std::size_t e = 0; e < 2; ++e) {
      const double v = std::stod(rows[i + 1][e + 1]);
      CHECK(std::abs(v - wide.cell(wide.engines[e], wide.combos[i]).mean) <= 5e-4);
    }
  }
  CHECK(rows[4][0] == "overall");
  const auto minima = row_minima(wide);
  CHECK(minima == std::vector<std::size_t>{0, 1, 1, 1});

  CHECK_THROWS_AS(emit_table(BenchmarkResult{}, TableFormat::Csv), InvalidArgument);
}

TEST_CASE("expectations") {
  const auto r = hand_result({{"audio-mix", {0.1, 0.2}}, {"dtw", {0.05, 0.3}}, {"learned", {0.08, 0.1}}},
                             {"placement", "quantity"});
  const auto v = check_orderings(r, R"(
# comment line
cell(learned, placement) < cell(audio-mix, placement)
cell(learned, placement) < cell(dtw, placement)   # fails
cell(learned, quantity) < cell(*, quantity)
overall(learned) <= overall(*)
cell(dtw, *) <= cell(audio-mix, *)
)");
  REQUIRE(v.size() == 5);
  CHECK(v[0].passed);
  CHECK_FALSE(v[1].passed);
  CHECK(v[1].detail.find("cell(learned, placement)") != std::string::npos);
  CHECK(v[2].passed);
  CHECK(v[3].passed);
  CHECK_FALSE(v[4].passed);

  CHECK_THROWS_AS(check_orderings(r, "cell(learned, spacing) < cell(dtw, spacing)"), InvalidExpectation);
  CHECK_THROWS_AS(check_orderings(r, "cell(oracle, placement) < cell(dtw, placement)"), InvalidExpectation);
  CHECK_THROWS_AS(check_orderings(r, "learned is best"), InvalidExpectation);
  CHECK_THROWS_AS(check_orderings(r, "cell(learned) < cell(dtw, placement)"), InvalidExpectation);
  CHECK(check_orderings(r, "\n  # nothing\n").empty());

  const auto single = hand_result({{"learned", {0.1}}}, {"placement"});
  CHECK_THROWS_AS(check_orderings(single, "cell(learned, placement) < cell(*, placement)"), InvalidExpectation);
}
