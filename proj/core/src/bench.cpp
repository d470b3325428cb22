#include "envmorph/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "envmorph/errors.hpp"
#include "envmorph/neural/checkpoint.hpp"
#include "envmorph/templates.hpp"

namespace envmorph {
namespace {

constexpr std::size_t kEngineChunk = 256;

std::uint64_t combo_mask(const AxisFlags& f) {
  std::uint64_t m = 0;
  for (std::size_t k = 0; k < std::size(kAllAxes); ++k) {
    if (f.has(kAllAxes[k])) m |= 1ULL << k;
  }
  return m;
}

std::string alpha_sampling_name(AlphaSampling a) { return a == AlphaSampling::Grid ? "grid" : "continuous"; }

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::ordered_json result_body(const BenchmarkResult& r) {
  nlohmann::ordered_json j;
  j["config"] = {{"suite", suite_name(r.kind)},
                 {"seed", r.seed},
                 {"count", r.count},
                 {"alpha_sampling", r.alpha_sampling},
                 {"alpha_map", r.alpha_map},
                 {"engines", r.engines},
                 {"combos", r.combos}};
  nlohmann::ordered_json cells = nlohmann::ordered_json::array();
  for (const auto& e : r.engines) {
    for (const auto& c : r.combos) {
      const auto& s = r.cell(e, c);
      cells.push_back({{"engine", e}, {"combo", c}, {"mean", s.mean}, {"std", s.std}, {"count", s.count}});
    }
  }
  j["cells"] = cells;
  nlohmann::ordered_json overall;
  for (const auto& e : r.engines) overall[e] = r.overall.at(e);
  j["overall"] = overall;
  return j;
}

}  // namespace

std::string suite_name(SuiteKind kind) {
  switch (kind) {
    case SuiteKind::SingleAxis:
      return "single-axis";
    case SuiteKind::Compositional:
      return "compositional";
    case SuiteKind::Naturalistic:
      return "naturalistic";
  }
  return "unknown";
}

SuiteKind parse_suite_kind(const std::string& text) {
  for (auto k : {SuiteKind::SingleAxis, SuiteKind::Compositional, SuiteKind::Naturalistic}) {
    if (suite_name(k) == text) return k;
  }
  throw InvalidArgument("unknown suite '" + text + "' (expected single-axis, compositional or naturalistic)");
}

SeedStream suite_stream(SuiteKind kind) noexcept {
  switch (kind) {
    case SuiteKind::SingleAxis:
      return SeedStream::EvalSingleAxis;
    case SuiteKind::Compositional:
      return SeedStream::EvalCompositional;
    case SuiteKind::Naturalistic:
      return SeedStream::EvalNaturalistic;
  }
  return SeedStream::EvalSingleAxis;
}

std::vector<AxisFlags> default_combos(SuiteKind kind) {
  return kind == SuiteKind::Compositional ? compositional_combos() : single_axis_combos();
}

void SuiteConfig::validate() const {
  if (count < 1) throw InvalidArgument("suite count must be >= 1");
  if (engines.empty()) throw InvalidArgument("suite needs at least one engine");
  for (const auto& c : combos) {
    if (c.count() == 0) throw InvalidArgument("axis combination varies no axis");
  }
}

std::vector<AxisFlags> SuiteConfig::effective_combos() const {
  return combos.empty() ? default_combos(kind) : combos;
}

BenchEngine oracle_engine() {
  return {kOracleEngine, [](std::span<const MorphTuple> tuples) {
            std::vector<Envelope> out;
            out.reserve(tuples.size());
            for (const auto& t : tuples) out.push_back(t.morph);
            return out;
          }};
}

BenchEngine make_bench_engine(const MorphEngine& engine) {
  return {engine.name(), [engine](std::span<const MorphTuple> tuples) {
            std::vector<Envelope> out;
            out.reserve(tuples.size());
            std::vector<Envelope> a, b;
            std::vector<double> alpha;
            for (std::size_t i = 0; i < tuples.size(); i += kEngineChunk) {
              const auto chunk = tuples.subspan(i, std::min(kEngineChunk, tuples.size() - i));
              a.clear();
              b.clear();
              alpha.clear();
              for (const auto& t : chunk) {
                a.push_back(t.a);
                b.push_back(t.b);
                alpha.push_back(t.alpha);
              }
              auto part = engine.morph_batch(a, b, alpha);
              out.insert(out.end(), part.begin(), part.end());
            }
            return out;
          }};
}

const CellStats& BenchmarkResult::cell(const std::string& engine, const std::string& combo) const {
  const auto e = cells.find(engine);
  if (e == cells.end()) throw InvalidArgument("no engine '" + engine + "' in benchmark result");
  const auto c = e->second.find(combo);
  if (c == e->second.end()) throw InvalidArgument("no combination '" + combo + "' in benchmark result");
  return c->second;
}

std::string BenchmarkResult::run_id() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(result_body(*this).dump())));
  return buf;
}

std::string BenchmarkResult::to_json() const {
  nlohmann::ordered_json j;
  j["run_id"] = run_id();
  const auto body = result_body(*this);
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j.dump(2) + "\n";
}

bool operator==(const BenchmarkResult& x, const BenchmarkResult& y) {
  if (x.kind != y.kind || x.seed != y.seed || x.count != y.count || x.alpha_sampling != y.alpha_sampling ||
      x.alpha_map != y.alpha_map || x.engines != y.engines || x.combos != y.combos ||
      x.overall != y.overall) {
    return false;
  }
  for (const auto& e : x.engines) {
    for (const auto& c : x.combos) {
      const auto& a = x.cell(e, c);
      const auto& b = y.cell(e, c);
      if (a.mean != b.mean || a.std != b.std || a.count != b.count) return false;
    }
  }
  return true;
}

MorphTuple suite_tuple(const SuiteConfig& cfg, const AxisFlags& combo, std::size_t index,
                       std::span<const TemplateKernel> templates) {
  const auto seed = derive_seed(cfg.seed, suite_stream(cfg.kind), (combo_mask(combo) << 32) | index);
  const double alpha = draw_alpha(seed, cfg.alpha);
  ImpulseKernel kernel = GaussianKernel{};
  if (cfg.kind == SuiteKind::Naturalistic) {
    if (templates.empty()) throw TemplateMissing("naturalistic suite needs at least one impulse template");
    Rng pick(mix64(seed ^ 0x7465'6d70'6c61'7465ULL));
    kernel = templates[static_cast<std::size_t>(uniform_int(pick, 0, static_cast<int>(templates.size()) - 1))];
  }
  try {
    return sample_tuple(combo, alpha, seed, kernel);
  } catch (const GenerationExhausted& e) {
    throw GenerationExhausted(std::string(e.what()) + " (tuple " + std::to_string(index) + ")", index);
  }
}

BenchmarkResult run_suite(const SuiteConfig& cfg) {
  cfg.validate();
  EngineModels models;
  std::vector<BenchEngine> engines;
  for (const auto& name : cfg.engines) {
    if (name == kOracleEngine) {
      engines.push_back(oracle_engine());
      continue;
    }
    const auto kind = parse_engine_kind(name);
    if (engine_needs_autoencoder(kind) && !models.autoencoder) {
      if (cfg.autoencoder_path.empty()) throw CheckpointMissing("engine " + name + " needs an autoencoder checkpoint");
      models.autoencoder = std::make_shared<const Autoencoder>(load_autoencoder(cfg.autoencoder_path));
    }
    if (engine_needs_mapper(kind) && !models.mapper) {
      if (cfg.mapper_path.empty()) throw CheckpointMissing("engine " + name + " needs a mapper checkpoint");
      models.mapper = std::make_shared<const Mapper>(load_mapper(cfg.mapper_path));
    }
    engines.push_back(make_bench_engine(MorphEngine(kind, models, cfg.alpha_map)));
  }
  return run_suite(cfg, engines);
}

BenchmarkResult run_suite(const SuiteConfig& cfg, const std::vector<BenchEngine>& engines) {
  if (cfg.count < 1) throw InvalidArgument("suite count must be >= 1");
  if (engines.empty()) throw InvalidArgument("suite needs at least one engine");
  std::vector<TemplateKernel> templates = cfg.templates;
  if (cfg.kind == SuiteKind::Naturalistic && templates.empty()) templates = bundled_templates();

  BenchmarkResult r;
  r.kind = cfg.kind;
  r.seed = cfg.seed;
  r.count = cfg.count;
  r.alpha_sampling = alpha_sampling_name(cfg.alpha);
  r.alpha_map = cfg.alpha_map.description();
  for (const auto& e : engines) {
    if (std::find(r.engines.begin(), r.engines.end(), e.name) != r.engines.end()) {
      throw InvalidArgument("engine '" + e.name + "' listed twice");
    }
    r.engines.push_back(e.name);
  }
  const auto combos = cfg.effective_combos();
  for (const auto& c : combos) r.combos.push_back(c.name());

  std::map<std::string, std::pair<double, std::size_t>> totals;
  std::vector<MorphTuple> tuples;
  for (const auto& combo : combos) {
    tuples.clear();
    tuples.reserve(cfg.count);
    for (std::size_t i = 0; i < cfg.count; ++i) tuples.push_back(suite_tuple(cfg, combo, i, templates));
    for (const auto& engine : engines) {
      const auto out = engine.run(tuples);
      if (out.size() != tuples.size()) throw InvalidArgument("engine " + engine.name + " returned wrong count");
      double sum = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < tuples.size(); ++i) {
        const double e = rmse(out[i], tuples[i].morph);
        sum += e;
        sq += e * e;
      }
      const double n = static_cast<double>(tuples.size());
      CellStats s;
      s.count = tuples.size();
      s.mean = sum / n;
      s.std = std::sqrt(std::max(0.0, sq / n - s.mean * s.mean));
      r.cells[engine.name][combo.name()] = s;
      auto& t = totals[engine.name];
      t.first += sum;
      t.second += tuples.size();
    }
  }
  for (const auto& [name, t] : totals) r.overall[name] = t.first / static_cast<double>(t.second);
  return r;
}

}  // namespace envmorph
