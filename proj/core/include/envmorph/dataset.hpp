#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "envmorph/rng.hpp"
#include "envmorph/synthgen.hpp"

namespace envmorph {

enum class AlphaSampling {
  Continuous,  // U[0, 1]
  Grid,        // uniform over {0.1, 0.2, ..., 0.9}
};

AlphaSampling parse_alpha_sampling(const std::string& text);

struct DatasetConfig {
  std::size_t count = 10000;
  std::uint64_t base_seed = 0;
  /// Tuple i varies combos[i % combos.size()].
  std::vector<AxisFlags> combos = single_axis_combos();
  AlphaSampling alpha = AlphaSampling::Continuous;
  ParamRanges ranges;
  /// Empty means Gaussian impulses; otherwise each tuple picks one template.
  std::vector<TemplateKernel> templates;
  SeedStream stream = SeedStream::Dataset;

  void validate() const;
};

double draw_alpha(std::uint64_t tuple_seed, AlphaSampling mode);

/// Tuple `index` of the dataset; a pure function of (config, index).
MorphTuple dataset_tuple(const DatasetConfig& cfg, std::size_t index);

/// GenerationExhausted carries the failing tuple index.
std::vector<MorphTuple> generate_tuples(const DatasetConfig& cfg);

/// One manifest.jsonl record.
std::string manifest_line(std::size_t index, const MorphTuple& tuple, const std::string& path_a,
                          const std::string& path_b, const std::string& path_morph);

/// Writes envelopes/<index>_{a,b,morph}.env1 and manifest.jsonl under
/// out_dir. Returns the manifest lines.
std::vector<std::string> generate_dataset(const DatasetConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace envmorph
