#include <cmath>

#include "envmorph/errors.hpp"
#include "envmorph/neural/models.hpp"

namespace envmorph {

using nn::LayerSpec;
using nn::Tensor;

const std::vector<LayerSpec>& Mapper::layers() {
  static const std::vector<LayerSpec> layers = {
      LayerSpec::dense(static_cast<int>(kMapperInput), kMapperHidden), LayerSpec::relu(),
      LayerSpec::dense(kMapperHidden, kMapperHidden),                  LayerSpec::relu(),
      LayerSpec::dense(kMapperHidden, static_cast<int>(kLatentDim)),
  };
  return layers;
}

Mapper::Mapper() : net_(layers()), params_(static_cast<std::size_t>(net_.param_count()), 0.0f) {}

Mapper Mapper::initialized(std::uint64_t seed) {
  Mapper m;
  Rng rng(derive_seed(seed, SeedStream::MapperInit, 0));
  m.net_.init(std::span<float>(m.params_), rng);
  return m;
}

Tensor<float> Mapper::forward_batch(const Tensor<float>& features, nn::Workspace<float>* ws) const {
  if (features.channels() != static_cast<nn::Index>(kMapperInput) || features.length != 1) {
    throw InvalidArgument("mapper: expected [N, 192, 1] features");
  }
  return net_.forward(std::span<const float>(params_), features, ws);
}

std::array<float, kMapperInput> mapper_features(const LatentVec& z_a, const LatentVec& z_b, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("mapper_features: alpha must lie in [0, 1]");
  // weight of z_a is alpha, weight of z_b is 1 - alpha
  const auto w = mix_weights(alpha);
  std::array<float, kMapperInput> f{};
  for (std::size_t i = 0; i < kLatentDim; ++i) {
    f[i] = z_a[i] + z_b[i];
    f[kLatentDim + i] = std::abs(z_a[i] - z_b[i]);
    f[2 * kLatentDim + i] = static_cast<float>(w.second * z_a[i] + w.first * z_b[i]);
  }
  return f;
}

Tensor<float> mapper_feature_batch(std::span<const LatentVec> z_a, std::span<const LatentVec> z_b,
                                   std::span<const double> alpha) {
  if (z_a.size() != z_b.size() || z_a.size() != alpha.size()) {
    throw InvalidArgument("mapper_feature_batch: size mismatch");
  }
  const auto n = static_cast<nn::Index>(z_a.size());
  Tensor<float> t(n, static_cast<nn::Index>(kMapperInput), 1);
  for (nn::Index i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const auto f = mapper_features(z_a[idx], z_b[idx], alpha[idx]);
    for (std::size_t k = 0; k < kMapperInput; ++k) t.data(static_cast<nn::Index>(k), i) = f[k];
  }
  return t;
}

LatentVec mapper_forward(const LatentVec& z_a, const LatentVec& z_b, double alpha, const Mapper& m) {
  const auto out = m.forward_batch(mapper_feature_batch(std::span(&z_a, 1), std::span(&z_b, 1), std::span(&alpha, 1)));
  if (!out.all_finite()) throw NumericFailure("mapper produced non-finite activations");
  return latent_column(out, 0);
}

}  // namespace envmorph
