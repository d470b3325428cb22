#include "envmorph/neural/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "envmorph/errors.hpp"
#include "envmorph/rng.hpp"

namespace envmorph {
namespace {

constexpr std::size_t kEncodeChunk = 256;

bool all_finite(std::span<const float> v) {
  return std::all_of(v.begin(), v.end(), [](float x) { return std::isfinite(x); });
}

double scheduled_lr(const TrainConfig& cfg, std::size_t step, std::size_t total) {
  if (cfg.final_lr_factor == 1.0 || total <= 1) return cfg.adam.learning_rate;
  const double progress = static_cast<double>(step) / static_cast<double>(total - 1);
  const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  return cfg.adam.learning_rate * (cfg.final_lr_factor + (1.0 - cfg.final_lr_factor) * cosine);
}

// Deterministic epoch-wise shuffling.
class BatchOrder {
 public:
  BatchOrder(std::size_t n, std::uint64_t seed) : order_(n), rng_(seed) { reshuffle(); }

  std::span<const std::size_t> next(std::size_t batch) {
    if (pos_ >= order_.size()) reshuffle();
    const std::size_t take = std::min(batch, order_.size() - pos_);
    std::span<const std::size_t> out(order_.data() + pos_, take);
    pos_ += take;
    return out;
  }
  /// Like next(), but only hands out full batches.
  std::span<const std::size_t> next_full(std::size_t batch) {
    if (pos_ + batch > order_.size()) reshuffle();
    return next(batch);
  }
  void reshuffle() {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    for (std::size_t i = order_.size(); i > 1; --i) {
      std::swap(order_[i - 1], order_[rng_() % i]);
    }
    pos_ = 0;
  }
  bool at_epoch_end() const noexcept { return pos_ >= order_.size(); }

 private:
  std::vector<std::size_t> order_;
  Rng rng_;
  std::size_t pos_ = 0;
};

std::vector<LatentVec> encode_chunked(std::span<const Envelope> envelopes, const Autoencoder& ae) {
  std::vector<LatentVec> out;
  out.reserve(envelopes.size());
  for (std::size_t i = 0; i < envelopes.size(); i += kEncodeChunk) {
    const auto chunk = envelopes.subspan(i, std::min(kEncodeChunk, envelopes.size() - i));
    auto z = encode_all(chunk, ae);
    out.insert(out.end(), z.begin(), z.end());
  }
  return out;
}

}  // namespace

TrainConfig TrainConfig::autoencoder_defaults() {
  TrainConfig cfg;
  cfg.adam.learning_rate = 3e-4;
  cfg.final_lr_factor = 0.1;
  return cfg;
}

TrainConfig TrainConfig::mapper_defaults() {
  TrainConfig cfg;
  cfg.loss = nn::LossKind::Rmse;
  return cfg;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw InvalidArgument("batch_size must be >= 1");
  if (!(adam.learning_rate >= 0.0) || !std::isfinite(adam.learning_rate)) {
    throw InvalidArgument("learning_rate must be finite and >= 0");
  }
  if (!(final_lr_factor >= 0.0 && final_lr_factor <= 1.0)) {
    throw InvalidArgument("final_lr_factor must lie in [0, 1]");
  }
}

std::vector<nn::LossTerm> TrainConfig::loss_terms() const {
  std::vector<nn::LossTerm> terms{{loss, 1.0}};
  terms.insert(terms.end(), extra_terms.begin(), extra_terms.end());
  return terms;
}

std::string TrainLog::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "step,loss\n";
  for (const auto& [step, loss] : entries) out << step << ',' << loss << '\n';
  return out.str();
}

AutoencoderTrainResult train_autoencoder(std::span<const Envelope> data, const TrainConfig& cfg,
                                         const ProgressFn& progress, const Autoencoder* initial) {
  cfg.validate();
  if (data.size() < cfg.batch_size) throw InvalidArgument("autoencoder dataset smaller than one batch");

  AutoencoderTrainResult result{initial ? *initial : Autoencoder::initialized(cfg.seed), {}, std::nullopt};
  Autoencoder& model = result.model;
  const auto terms = cfg.loss_terms();
  nn::AdamState enc_state(model.encoder_params().size());
  nn::AdamState dec_state(model.decoder_params().size());
  std::vector<float> enc_grad(model.encoder_params().size());
  std::vector<float> dec_grad(model.decoder_params().size());
  BatchOrder order(data.size(), derive_seed(cfg.seed, SeedStream::AutoencoderCorpus, ~0ULL));
  std::vector<Envelope> batch;
  batch.reserve(cfg.batch_size);

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    batch.clear();
    for (std::size_t idx : order.next_full(cfg.batch_size)) batch.push_back(data[idx]);
    const auto x = envelope_batch(batch);

    nn::Workspace<float> enc_ws, dec_ws;
    const auto z = model.encode_batch(x, &enc_ws);
    const auto y = model.decode_batch(z, &dec_ws);
    const auto loss = nn::weighted_loss(terms, y.data, x.data);
    if (!std::isfinite(loss.value)) {
      result.failure = "non-finite loss at step " + std::to_string(step);
      return result;
    }

    std::fill(enc_grad.begin(), enc_grad.end(), 0.0f);
    std::fill(dec_grad.begin(), dec_grad.end(), 0.0f);
    nn::Tensor<float> dy;
    dy.data = loss.grad;
    dy.batch = y.batch;
    dy.length = y.length;
    const auto dz = model.decoder().backward(std::span<const float>(model.decoder_params()), dec_ws, dy,
                                             std::span<float>(dec_grad));
    model.encoder().backward(std::span<const float>(model.encoder_params()), enc_ws, dz,
                             std::span<float>(enc_grad));
    if (!all_finite(enc_grad) || !all_finite(dec_grad)) {
      result.failure = "non-finite gradient at step " + std::to_string(step);
      return result;
    }

    auto adam = cfg.adam;
    adam.learning_rate = scheduled_lr(cfg, step, cfg.steps);
    nn::adam_step(std::span<float>(model.encoder_params()), std::span<const float>(enc_grad), enc_state, adam);
    nn::adam_step(std::span<float>(model.decoder_params()), std::span<const float>(dec_grad), dec_state, adam);
    result.log.entries.emplace_back(step, loss.value);
    if (progress) progress(step, loss.value);
  }
  return result;
}

double mapper_embedding_rmse(std::span<const LatentVec> z_a, std::span<const LatentVec> z_b,
                             std::span<const LatentVec> z_morph, std::span<const double> alpha,
                             const Mapper& mapper) {
  double sum = 0.0;
  for (std::size_t i = 0; i < z_a.size(); i += kEncodeChunk) {
    const std::size_t n = std::min(kEncodeChunk, z_a.size() - i);
    const auto out = mapper.forward_batch(
        mapper_feature_batch(z_a.subspan(i, n), z_b.subspan(i, n), alpha.subspan(i, n)));
    const auto target = latent_batch(z_morph.subspan(i, n));
    sum += (out.data - target.data).template cast<double>().squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(z_a.size() * kLatentDim));
}

MapperTrainResult train_mapper(std::span<const MorphTuple> data, const Autoencoder& ae, const TrainConfig& cfg,
                               const ProgressFn& progress) {
  cfg.validate();
  if (data.empty()) throw InvalidArgument("mapper dataset is empty");

  std::vector<Envelope> a, b, m;
  std::vector<double> alpha;
  for (const auto& t : data) {
    a.push_back(t.a);
    b.push_back(t.b);
    m.push_back(t.morph);
    alpha.push_back(t.alpha);
  }
  const auto z_a = encode_chunked(a, ae);
  const auto z_b = encode_chunked(b, ae);
  const auto z_m = encode_chunked(m, ae);

  MapperTrainResult result{Mapper::initialized(cfg.seed), {}, {}, std::nullopt};
  Mapper& model = result.model;
  const auto terms = cfg.loss_terms();
  nn::AdamState state(model.params().size());
  std::vector<float> grad(model.params().size());
  BatchOrder order(data.size(), derive_seed(cfg.seed, SeedStream::MapperTrain, ~0ULL));
  const std::size_t steps_per_epoch = (data.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total = steps_per_epoch * cfg.epochs;

  std::vector<LatentVec> ba, bb, bm;
  std::vector<double> balpha;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t s = 0; s < steps_per_epoch; ++s, ++step) {
      ba.clear();
      bb.clear();
      bm.clear();
      balpha.clear();
      for (std::size_t idx : order.next(cfg.batch_size)) {
        ba.push_back(z_a[idx]);
        bb.push_back(z_b[idx]);
        bm.push_back(z_m[idx]);
        balpha.push_back(alpha[idx]);
      }
      nn::Workspace<float> ws;
      const auto pred = model.forward_batch(mapper_feature_batch(ba, bb, balpha), &ws);
      const auto target = latent_batch(bm);
      const auto loss = nn::weighted_loss(terms, pred.data, target.data);
      if (!std::isfinite(loss.value)) {
        result.failure = "non-finite loss at step " + std::to_string(step);
        return result;
      }
      std::fill(grad.begin(), grad.end(), 0.0f);
      nn::Tensor<float> dy;
      dy.data = loss.grad;
      dy.batch = pred.batch;
      dy.length = 1;
      model.network().backward(std::span<const float>(model.params()), ws, dy, std::span<float>(grad));
      if (!all_finite(grad)) {
        result.failure = "non-finite gradient at step " + std::to_string(step);
        return result;
      }
      auto adam = cfg.adam;
      adam.learning_rate = scheduled_lr(cfg, step, total);
      nn::adam_step(std::span<float>(model.params()), std::span<const float>(grad), state, adam);
      result.log.entries.emplace_back(step, loss.value);
      if (progress) progress(step, loss.value);
    }
    result.epoch_rmse.push_back(mapper_embedding_rmse(z_a, z_b, z_m, alpha, model));
  }
  return result;
}

}  // namespace envmorph
