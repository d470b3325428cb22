#include "envmorph/dataset.hpp"

#include <cstdio>
#include <json.hpp>

#include "envmorph/errors.hpp"
#include "envmorph/io.hpp"

namespace envmorph {

AlphaSampling parse_alpha_sampling(const std::string& text) {
  if (text == "continuous") return AlphaSampling::Continuous;
  if (text == "grid") return AlphaSampling::Grid;
  throw InvalidArgument("alpha sampling must be 'continuous' or 'grid', got '" + text + "'");
}

void DatasetConfig::validate() const {
  if (count < 1) throw InvalidArgument("dataset count must be >= 1");
  if (combos.empty()) throw InvalidArgument("dataset needs at least one axis combination");
  for (const auto& c : combos) {
    if (c.count() == 0) throw InvalidArgument("axis combination varies no axis");
  }
  ranges.validate();
}

double draw_alpha(std::uint64_t tuple_seed, AlphaSampling mode) {
  Rng rng(mix64(tuple_seed));
  if (mode == AlphaSampling::Grid) return uniform_int(rng, 1, 9) / 10.0;
  return uniform01(rng);
}

MorphTuple dataset_tuple(const DatasetConfig& cfg, std::size_t index) {
  const auto& flags = cfg.combos[index % cfg.combos.size()];
  const auto seed = derive_seed(cfg.base_seed, cfg.stream, index);
  const double alpha = draw_alpha(seed, cfg.alpha);
  ImpulseKernel kernel = GaussianKernel{};
  if (!cfg.templates.empty()) {
    Rng pick(mix64(seed ^ 0x7465'6d70'6c61'7465ULL));
    kernel = cfg.templates[static_cast<std::size_t>(uniform_int(pick, 0, static_cast<int>(cfg.templates.size()) - 1))];
  }
  try {
    return sample_tuple(flags, alpha, seed, kernel, cfg.ranges);
  } catch (const GenerationExhausted& e) {
    throw GenerationExhausted(std::string(e.what()) + " (tuple " + std::to_string(index) + ")", index);
  }
}

std::vector<MorphTuple> generate_tuples(const DatasetConfig& cfg) {
  cfg.validate();
  std::vector<MorphTuple> out;
  out.reserve(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) out.push_back(dataset_tuple(cfg, i));
  return out;
}

std::string manifest_line(std::size_t index, const MorphTuple& tuple, const std::string& path_a,
                          const std::string& path_b, const std::string& path_morph) {
  const auto a = tuple.axes.spec_at(0.0);
  const auto b = tuple.axes.spec_at(1.0);
  auto axis = [&](Axis ax, double va, double vb) {
    return nlohmann::ordered_json{{"varied", tuple.axes.endpoints(ax).has_value()}, {"a", va}, {"b", vb}};
  };
  nlohmann::ordered_json j;
  j["index"] = index;
  j["alpha"] = tuple.alpha;
  j["axes"] = {
      {"amplitude", axis(Axis::Amplitude, a.amplitude, b.amplitude)},
      {"placement", axis(Axis::Placement, a.onset, b.onset)},
      {"spacing", axis(Axis::Spacing, a.ioi, b.ioi)},
      {"quantity", axis(Axis::Quantity, a.quantity, b.quantity)},
  };
  j["seed"] = tuple.seed;
  j["paths"] = {{"a", path_a}, {"b", path_b}, {"morph", path_morph}};
  return j.dump();
}

std::vector<std::string> generate_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "envelopes", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "envelopes").string() + ": " + ec.message());

  std::vector<std::string> lines;
  lines.reserve(cfg.count);
  std::string manifest;
  for (std::size_t i = 0; i < cfg.count; ++i) {
    const auto tuple = dataset_tuple(cfg, i);
    char stem[32];
    std::snprintf(stem, sizeof stem, "%06zu", i);
    const std::string pa = std::string("envelopes/") + stem + "_a.env1";
    const std::string pb = std::string("envelopes/") + stem + "_b.env1";
    const std::string pm = std::string("envelopes/") + stem + "_morph.env1";
    save_envelope(tuple.a, out_dir / pa);
    save_envelope(tuple.b, out_dir / pb);
    save_envelope(tuple.morph, out_dir / pm);
    lines.push_back(manifest_line(i, tuple, pa, pb, pm));
    manifest += lines.back();
    manifest += '\n';
  }
  io::write_file_atomic(out_dir / "manifest.jsonl", manifest);
  return lines;
}

}  // namespace envmorph
