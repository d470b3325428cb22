#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "envmorph/envelope.hpp"
#include "envmorph/neural/adam.hpp"
#include "envmorph/neural/loss.hpp"
#include "envmorph/neural/models.hpp"
#include "envmorph/synthgen.hpp"

namespace envmorph {

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t steps = 20000;  // autoencoder
  std::size_t epochs = 10;    // mapper
  nn::AdamConfig adam;
  std::uint64_t seed = 0;
  nn::LossKind loss = nn::LossKind::L1;
  /// Added to the primary loss term; empty by default.
  std::vector<nn::LossTerm> extra_terms;
  /// Cosine decay of the learning rate down to this fraction of the initial
  /// rate over the run; 1 keeps it constant.
  double final_lr_factor = 1.0;

  static TrainConfig autoencoder_defaults();
  static TrainConfig mapper_defaults();

  void validate() const;
  std::vector<nn::LossTerm> loss_terms() const;
};

/// (step, loss) pairs; serialized as CSV with a "step,loss" header.
struct TrainLog {
  std::vector<std::pair<std::size_t, double>> entries;
  std::string to_csv() const;
};

using ProgressFn = std::function<void(std::size_t step, double loss)>;

struct AutoencoderTrainResult {
  Autoencoder model;
  TrainLog log;
  /// Set when a non-finite loss or gradient stopped training; `model` is
  /// then the last parameters that produced a finite step.
  std::optional<std::string> failure;
};

/// Starts from `initial` when given, otherwise from a seeded initialization.
AutoencoderTrainResult train_autoencoder(std::span<const Envelope> data, const TrainConfig& cfg,
                                         const ProgressFn& progress = {}, const Autoencoder* initial = nullptr);

struct MapperTrainResult {
  Mapper model;
  TrainLog log;
  /// Embedding RMSE over the whole training set after each epoch.
  std::vector<double> epoch_rmse;
  std::optional<std::string> failure;
};

/// Trains the mapper on frozen autoencoder embeddings.
MapperTrainResult train_mapper(std::span<const MorphTuple> data, const Autoencoder& ae, const TrainConfig& cfg,
                               const ProgressFn& progress = {});

/// Embedding RMSE of `mapper` over `data`, computed in fixed-size batches.
double mapper_embedding_rmse(std::span<const LatentVec> z_a, std::span<const LatentVec> z_b,
                             std::span<const LatentVec> z_morph, std::span<const double> alpha,
                             const Mapper& mapper);

}  // namespace envmorph
