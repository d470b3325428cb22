#include <doctest.h>

#include <cmath>
#include <fstream>

#include "envmorph/errors.hpp"
#include "envmorph/neural/adam.hpp"
#include "envmorph/neural/checkpoint.hpp"
#include "envmorph/neural/loss.hpp"
#include "envmorph/neural/models.hpp"
#include "envmorph/neural/training.hpp"
#include "envmorph/synthgen.hpp"
#include "envmorph/templates.hpp"
#include "helpers.hpp"

using namespace envmorph;
using namespace envmorph::nn;

namespace {

Tensor<double> random_tensor(Rng& rng, Index batch, Index channels, Index length) {
  Tensor<double> t(batch, channels, length);
  for (Index i = 0; i < t.data.size(); ++i) t.data.data()[i] = uniform(rng, -1.0, 1.0);
  return t;
}

std::vector<double> random_params(const Network<double>& net, Rng& rng) {
  std::vector<double> p(static_cast<std::size_t>(net.param_count()));
  net.init(std::span<double>(p), rng);
  // Nonzero biases so their gradients are exercised.
  for (auto& v : p) v += uniform(rng, -0.05, 0.05);
  return p;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-6, std::abs(a) + std::abs(b)); }

// Central differences of sum(w * f(params, x)) against backward().
double gradient_error(const std::vector<LayerSpec>& layers, Index cin, Index len, Index batch, std::uint64_t seed) {
  const Network<double> net(layers);
  Rng rng(seed);
  auto p = random_params(net, rng);
  const auto x = random_tensor(rng, batch, cin, len);
  Workspace<double> ws;
  const auto y = net.forward(std::span<const double>(p), x, &ws);
  Tensor<double> w = random_tensor(rng, y.batch, y.channels(), y.length);
  std::vector<double> g(p.size(), 0.0);
  const auto gx = net.backward(std::span<const double>(p), ws, w, std::span<double>(g));

  const auto objective = [&](const std::vector<double>& pp, const Tensor<double>& xx) {
    return (net.forward(std::span<const double>(pp), xx).data.array() * w.data.array()).sum();
  };
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    auto pp = p;
    pp[k] += h;
    const double up = objective(pp, x);
    pp[k] -= 2 * h;
    const double down = objective(pp, x);
    worst = std::max(worst, rel_err((up - down) / (2 * h), g[k]));
  }
  for (Index k = 0; k < x.data.size(); ++k) {
    auto xx = x;
    xx.data.data()[k] += h;
    const double up = objective(p, xx);
    xx.data.data()[k] -= 2 * h;
    const double down = objective(p, xx);
    worst = std::max(worst, rel_err((up - down) / (2 * h), gx.data.data()[k]));
  }
  return worst;
}

// Reference cross-correlation: kernel 2s+1 centered on position m*s, zero padded.
Tensor<double> naive_conv(const LayerSpec& s, const std::vector<double>& p, const Tensor<double>& x) {
  const Index out_len = (x.length + s.stride - 1) / s.stride;
  Tensor<double> y(x.batch, s.out, out_len);
  const auto w = [&](Index o, Index k, Index c) { return p[static_cast<std::size_t>((k * s.in + c) * s.out + o)]; };
  for (Index n = 0; n < x.batch; ++n) {
    for (Index o = 0; o < s.out; ++o) {
      for (Index m = 0; m < out_len; ++m) {
        double acc = p[static_cast<std::size_t>(s.weight_count() + o)];
        for (Index k = 0; k < s.kernel; ++k) {
          const Index pos = m * s.stride - s.stride + k;
          if (pos < 0 || pos >= x.length) continue;
          for (Index c = 0; c < s.in; ++c) acc += w(o, k, c) * x.column(n, pos)(c);
        }
        y.column(n, m)(o) = acc;
      }
    }
  }
  return y;
}

Tensor<double> naive_upsample(const Tensor<double>& x, Index factor) {
  Tensor<double> u(x.batch, x.channels(), x.length * factor);
  for (Index n = 0; n < x.batch; ++n) {
    for (Index j = 0; j < u.length; ++j) u.column(n, j) = x.column(n, j / factor);
  }
  return u;
}

std::vector<MorphTuple> small_tuples(std::size_t n, std::uint64_t seed, bool endpoints_only = false) {
  std::vector<MorphTuple> out;
  const auto combos = single_axis_combos();
  for (std::size_t i = 0; i < n; ++i) {
    const double alpha = endpoints_only ? static_cast<double>(i % 2) : static_cast<double>(i % 9 + 1) / 10.0;
    out.push_back(sample_tuple(combos[i % combos.size()], alpha, derive_seed(seed, SeedStream::Dataset, i)));
  }
  return out;
}

}  // namespace

TEST_CASE("layer shapes") {
  CHECK(LayerSpec::conv(2, 3, 4).kernel == 9);
  CHECK(LayerSpec::conv(2, 3, 4).output_length(16) == 4);
  CHECK(LayerSpec::conv(2, 3, 4).output_length(17) == 5);
  CHECK(LayerSpec::upsample_conv(2, 3, 4).output_length(5) == 20);
  CHECK(LayerSpec::conv(2, 3, 4).param_count() == 3 * 9 * 2 + 3);
}

TEST_CASE("conv matches the reference cross-correlation") {
  Rng rng(3);
  for (int stride : {1, 2, 4, 8}) {
    const auto s = LayerSpec::conv(2, 3, stride);
    const Network<double> net({s});
    const auto p = random_params(net, rng);
    const auto x = random_tensor(rng, 2, 2, 8 * stride + 3);
    const auto y = net.forward(std::span<const double>(p), x);
    const auto ref = naive_conv(s, p, x);
    CHECK(y.shape() == ref.shape());
    CHECK((y.data - ref.data).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("polyphase upsample-conv matches upsample followed by conv") {
  Rng rng(4);
  for (int factor : {2, 4, 8}) {
    const auto up = LayerSpec::upsample_conv(3, 2, factor);
    const Network<double> net({up});
    const auto p = random_params(net, rng);
    const auto x = random_tensor(rng, 2, 3, 5);
    const auto y = net.forward(std::span<const double>(p), x);
    // Stride-1 conv over the upsampled signal with a centered kernel of 2f+1 taps.
    const auto u = naive_upsample(x, factor);
    Tensor<double> ref(u.batch, up.out, u.length);
    for (Index n = 0; n < u.batch; ++n) {
      for (Index j = 0; j < u.length; ++j) {
        for (Index o = 0; o < up.out; ++o) {
          double acc = p[static_cast<std::size_t>(up.weight_count() + o)];
          for (Index k = 0; k < up.kernel; ++k) {
            const Index pos = j - factor + k;
            if (pos < 0 || pos >= u.length) continue;
            for (Index c = 0; c < up.in; ++c) {
              acc += p[static_cast<std::size_t>((k * up.in + c) * up.out + o)] * u.column(n, pos)(c);
            }
          }
          ref.column(n, j)(o) = acc;
        }
      }
    }
    CHECK(y.shape() == ref.shape());
    CHECK((y.data - ref.data).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("conv trivial cases") {
  const auto s = LayerSpec::conv(1, 1, 1);
  std::vector<double> p(static_cast<std::size_t>(s.param_count()), 0.0);
  p[1] = 1.0;  // center tap
  Rng rng(1);
  const auto x = random_tensor(rng, 1, 1, 12);
  CHECK(Network<double>({s}).forward(std::span<const double>(p), x).data == x.data);

  const auto big = LayerSpec::conv(2, 3, 4);
  const Network<double> net({big});
  auto q = random_params(net, rng);
  for (Index o = 0; o < big.out; ++o) q[static_cast<std::size_t>(big.weight_count() + o)] = 0.0;
  const Tensor<double> zero(2, 2, 16);
  Workspace<double> ws;
  const auto y = net.forward(std::span<const double>(q), zero, &ws);
  CHECK(y.data.isZero());
  std::vector<double> g(q.size(), 0.0);
  const Tensor<double> no_grad(2, 3, 4);
  net.backward(std::span<const double>(q), ws, no_grad, std::span<double>(g));
  for (double v : g) CHECK(v == 0.0);

  CHECK_THROWS_AS(net.forward(std::span<const double>(q), Tensor<double>(1, 1, 16)), InvalidArgument);
}

TEST_CASE("analytic gradients match central differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    CHECK(gradient_error({LayerSpec::conv(2, 3, 4)}, 2, 16, 2, seed) < 1e-4);
    CHECK(gradient_error({LayerSpec::conv(2, 3, 2)}, 2, 11, 2, seed) < 1e-4);
    CHECK(gradient_error({LayerSpec::upsample_conv(2, 3, 4)}, 2, 4, 2, seed) < 1e-4);
    CHECK(gradient_error({LayerSpec::upsample_conv(1, 2, 8)}, 1, 3, 2, seed) < 1e-4);
    CHECK(gradient_error({LayerSpec::dense(5, 4)}, 5, 1, 3, seed) < 1e-4);
    CHECK(gradient_error({LayerSpec::dense(5, 4), LayerSpec::relu()}, 5, 1, 3, seed) < 1e-4);
    CHECK(gradient_error({LayerSpec::conv(1, 2, 2), LayerSpec::sigmoid()}, 1, 8, 2, seed) < 1e-4);
    CHECK(gradient_error({LayerSpec::conv(1, 2, 2), LayerSpec::relu(), LayerSpec::conv(2, 3, 2), LayerSpec::relu(),
                          LayerSpec::upsample_conv(3, 2, 2), LayerSpec::relu(), LayerSpec::upsample_conv(2, 1, 2),
                          LayerSpec::sigmoid()},
                         1, 16, 2, seed) < 1e-4);
  }
}

TEST_CASE("loss gradients match central differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const Matrix<double> target = random_tensor(rng, 1, 4, 7).data;
    const Matrix<double> pred = random_tensor(rng, 1, 4, 7).data;
    for (auto kind : {LossKind::L1, LossKind::Rmse}) {
      const auto f = [&](const Matrix<double>& p) { return weighted_loss<double>({{kind, 1.0}}, p, target).value; };
      const auto r = weighted_loss<double>({{kind, 1.0}}, pred, target);
      for (Index k = 0; k < pred.size(); ++k) {
        auto up = pred, down = pred;
        up.data()[k] += 1e-5;
        down.data()[k] -= 1e-5;
        CHECK(rel_err((f(up) - f(down)) / 2e-5, r.grad.data()[k]) < 1e-4);
      }
    }
  }
}

TEST_CASE("loss values") {
  Matrix<double> p(1, 4), t(1, 4);
  p << 1, 2, 3, 4;
  t << 1, 1, 1, 1;
  CHECK(l1_loss(p, t).value == doctest::Approx(1.5));
  CHECK(rmse_loss(p, t).value == doctest::Approx(std::sqrt(14.0 / 4)));
  const auto same = rmse_loss(t, t);
  CHECK(same.value == 0.0);
  CHECK(same.grad.isZero());
  const auto combo = weighted_loss<double>({{LossKind::L1, 0.5}, {LossKind::Rmse, 2.0}}, p, t);
  CHECK(combo.value == doctest::Approx(0.5 * 1.5 + 2.0 * std::sqrt(3.5)));
  CHECK(parse_loss("l1") == LossKind::L1);
  CHECK(parse_loss("rmse") == LossKind::Rmse);
  CHECK_THROWS_AS(parse_loss("huber"), InvalidArgument);
}

TEST_CASE("adam") {
  SUBCASE("first step closed form") {
    std::vector<float> p{1.0f, -2.0f, 0.5f};
    const std::vector<float> g{0.3f, -4.0f, 1e-3f};
    AdamState st(3);
    AdamConfig cfg;
    cfg.learning_rate = 0.01;
    adam_step(std::span<float>(p), std::span<const float>(g), st, cfg);
    // m_hat = g and v_hat = g^2 after one step, so the update is lr * g / (|g| + eps).
    const double expect[] = {1.0 - 0.01 * 0.3 / (0.3 + 1e-8), -2.0 + 0.01 * 4.0 / (4.0 + 1e-8),
                             0.5 - 0.01 * 1e-3 / (1e-3 + 1e-8)};
    for (int i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(expect[i]).epsilon(1e-6));
  }
  SUBCASE("two steps against a direct evaluation") {
    std::vector<double> p{0.2};
    AdamState st(1);
    AdamConfig cfg;
    const double g1 = 0.5, g2 = -0.25;
    adam_step(std::span<double>(p), std::span<const double>(&g1, 1), st, cfg);
    adam_step(std::span<double>(p), std::span<const double>(&g2, 1), st, cfg);
    const double m1 = 0.1 * g1, v1 = 0.001 * g1 * g1;
    const double p1 = 0.2 - 1e-3 * (m1 / 0.1) / (std::sqrt(v1 / 0.001) + 1e-8);
    const double m2 = 0.9 * m1 + 0.1 * g2, v2 = 0.999 * v1 + 0.001 * g2 * g2;
    const double p2 = p1 - 1e-3 * (m2 / (1 - 0.81)) / (std::sqrt(v2 / (1 - 0.999 * 0.999)) + 1e-8);
    CHECK(p[0] == doctest::Approx(p2).epsilon(1e-12));
    CHECK(st.step == 2);
  }
  SUBCASE("zero gradient leaves parameters and decays moments") {
    std::vector<double> p{1.0, 2.0};
    AdamState st(2);
    st.m = {0.5, -0.5};
    st.v = {0.25, 0.25};
    st.step = 3;
    const std::vector<double> g{0.0, 0.0};
    AdamConfig cfg;
    cfg.learning_rate = 0.0;
    adam_step(std::span<double>(p), std::span<const double>(g), st, cfg);
    CHECK(p == std::vector<double>{1.0, 2.0});
    CHECK(st.m[0] == doctest::Approx(0.45));
    CHECK(st.v[0] == doctest::Approx(0.24975));
  }
  SUBCASE("parameter groups are independent") {
    Rng rng(8);
    std::vector<float> a(10), b(7), ga(10), gb(7);
    for (auto* v : {&a, &b, &ga, &gb}) {
      for (auto& x : *v) x = static_cast<float>(uniform(rng, -1, 1));
    }
    auto a2 = a, b2 = b;
    AdamState sa(10), sb(7), sa2(10), sb2(7);
    const AdamConfig cfg;
    adam_step(std::span<float>(a), std::span<const float>(ga), sa, cfg);
    adam_step(std::span<float>(b), std::span<const float>(gb), sb, cfg);
    adam_step(std::span<float>(b2), std::span<const float>(gb), sb2, cfg);
    adam_step(std::span<float>(a2), std::span<const float>(ga), sa2, cfg);
    CHECK(a == a2);
    CHECK(b == b2);
  }
}

TEST_CASE("autoencoder shapes and trivial cases") {
  const auto m = Autoencoder::initialized(0);
  CHECK(m.encoder().param_count() + m.decoder().param_count() < 1000000);
  Rng rng(2);
  const auto e = testutil::random_envelope(rng);
  const auto z1 = encode(e, m);
  const auto z2 = encode(e, m);
  CHECK(z1 == z2);
  CHECK(z1.finite());
  const auto d = decode(z1, m);
  CHECK(d.frames().size() == kFrames);
  for (float v : d.frames()) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }

  const Autoencoder zero;
  const auto flat = decode(LatentVec{}, zero);
  for (float v : flat.frames()) CHECK(v == 0.5f);

  const auto batch = m.encode_batch(envelope_batch(std::vector<Envelope>(3, e)));
  CHECK(batch.shape() == std::array<Index, 3>{3, 64, 1});
  CHECK_THROWS_AS(m.decode_batch(Tensor<float>(1, 32, 1)), InvalidArgument);
  CHECK_THROWS_AS(m.encode_batch(Tensor<float>(1, 1, 1000)), InvalidArgument);

  LatentVec bad;
  bad.values[3] = NAN;
  CHECK_THROWS_AS(decode(bad, m), NumericFailure);
}

TEST_CASE("encoder Lipschitz bound for small weights") {
  Autoencoder m;
  Rng rng(17);
  for (auto& v : m.encoder_params()) v = static_cast<float>(uniform(rng, -0.1, 0.1));
  // Operator norm of a conv is at most ||W||_F * sqrt(ceil(kernel / stride)).
  double bound = 1e-7;
  for (std::size_t i = 0; i < m.encoder().layers().size(); ++i) {
    const auto& l = m.encoder().layers()[i];
    if (!l.has_params()) continue;
    const auto off = static_cast<std::size_t>(m.encoder().param_offset(i));
    double fro = 0.0;
    for (Index k = 0; k < l.weight_count(); ++k) fro += std::pow(double(m.encoder_params()[off + k]), 2);
    bound *= std::sqrt(fro) * std::sqrt(std::ceil(double(l.kernel) / l.stride));
  }
  std::vector<float> f(kFrames);
  for (auto& v : f) v = static_cast<float>(uniform(rng, 0.0, 0.9));
  const Envelope a(f);
  f[700] += 1e-7f;
  const Envelope b(f);
  const double dist = latent_distance(encode(a, m), encode(b, m));
  CHECK(dist <= bound + 1e-6);
  CHECK(dist < 1e-2);
}

TEST_CASE("mapper features and forward") {
  Rng rng(6);
  LatentVec a, b;
  for (auto& v : a.values) v = static_cast<float>(uniform(rng, -2, 2));
  for (auto& v : b.values) v = static_cast<float>(uniform(rng, -2, 2));

  const auto same = mapper_features(a, a, 0.37);
  for (std::size_t i = 0; i < kLatentDim; ++i) {
    CHECK(same[i] == 2 * a[i]);
    CHECK(same[kLatentDim + i] == 0.0f);
    CHECK(same[2 * kLatentDim + i] == doctest::Approx(a[i]).epsilon(1e-6));
  }
  const auto half = mapper_features(a, b, 0.5);
  for (std::size_t i = 0; i < kLatentDim; ++i) CHECK(half[2 * kLatentDim + i] == half[i] * 0.5f);

  const auto m = Mapper::initialized(3);
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = uniform01(rng);
    CHECK(mapper_features(a, b, alpha) == mapper_features(b, a, 1.0 - alpha));
    CHECK(mapper_forward(a, b, alpha, m) == mapper_forward(b, a, 1.0 - alpha, m));
  }
  const auto f0 = mapper_features(a, b, 0.0);
  for (std::size_t i = 0; i < kLatentDim; ++i) CHECK(f0[2 * kLatentDim + i] == b[i]);

  const Mapper zero;
  for (float v : mapper_forward(a, b, 0.3, zero).values) CHECK(v == 0.0f);
  CHECK(Mapper::layers().size() == 5);
  CHECK(zero.network().param_count() == 192 * 128 + 128 + 128 * 128 + 128 + 128 * 64 + 64);
}

TEST_CASE("checkpoints") {
  const auto dir = testutil::temp_dir("ckpt");
  const auto ae = Autoencoder::initialized(11);
  save_checkpoint(ae, dir / "ae.emck");
  const auto back = load_autoencoder(dir / "ae.emck");
  CHECK(back == ae);
  Rng rng(1);
  const auto e = testutil::random_envelope(rng);
  CHECK(encode(e, back) == encode(e, ae));

  const auto mp = Mapper::initialized(12);
  save_checkpoint(mp, dir / "m.emck");
  CHECK(load_mapper(dir / "m.emck") == mp);

  CHECK_THROWS_AS(load_mapper(dir / "ae.emck"), CorruptCheckpoint);
  CHECK_THROWS_AS(load_autoencoder(dir / "missing.emck"), CheckpointMissing);

  std::vector<char> bytes;
  {
    std::ifstream in(dir / "ae.emck", std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  const auto write = [&](const std::vector<char>& b, const char* name) {
    std::ofstream out(dir / name, std::ios::binary);
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
  };
  write(std::vector<char>(bytes.begin(), bytes.end() - 10), "trunc.emck");
  CHECK_THROWS_AS(load_autoencoder(dir / "trunc.emck"), CorruptCheckpoint);
  auto shape = bytes;
  shape[28] = 17;  // out channels of the first encoder layer
  write(shape, "shape.emck");
  CHECK_THROWS_AS(load_autoencoder(dir / "shape.emck"), CorruptCheckpoint);
  auto magic = bytes;
  magic[0] = 'X';
  write(magic, "magic.emck");
  CHECK_THROWS_AS(load_autoencoder(dir / "magic.emck"), CorruptCheckpoint);
  auto longer = bytes;
  longer.push_back(0);
  write(longer, "long.emck");
  CHECK_THROWS_AS(load_autoencoder(dir / "long.emck"), CorruptCheckpoint);
}

TEST_CASE("train config") {
  auto cfg = TrainConfig::autoencoder_defaults();
  CHECK(cfg.batch_size == 64);
  CHECK(cfg.loss == LossKind::L1);
  CHECK(TrainConfig::mapper_defaults().loss == LossKind::Rmse);
  CHECK(TrainConfig::mapper_defaults().epochs == 10);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  TrainLog log;
  log.entries = {{0, 0.5}, {1, 0.25}};
  CHECK(log.to_csv() == "step,loss\n0,0.5\n1,0.25\n");
}

TEST_CASE("autoencoder training contracts") {
  const auto data = autoencoder_corpus(64, 5);
  auto cfg = TrainConfig::autoencoder_defaults();
  cfg.batch_size = 8;
  cfg.steps = 4;
  const auto r1 = train_autoencoder(data, cfg);
  const auto r2 = train_autoencoder(data, cfg);
  CHECK_FALSE(r1.failure);
  CHECK(r1.log.entries == r2.log.entries);
  CHECK(r1.model == r2.model);
  CHECK(r1.log.entries.size() == 4);

  cfg.adam.learning_rate = 0.0;
  const auto frozen = train_autoencoder(data, cfg);
  CHECK(frozen.model == Autoencoder::initialized(cfg.seed));

  cfg.batch_size = 100;
  CHECK_THROWS_AS(train_autoencoder(data, cfg), InvalidArgument);
}

TEST_CASE("autoencoder loss decreases") {
  const auto data = autoencoder_corpus(256, 0);
  auto cfg = TrainConfig::autoencoder_defaults();
  cfg.batch_size = 16;
  cfg.steps = 150;
  const auto r = train_autoencoder(data, cfg);
  REQUIRE_FALSE(r.failure);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    first += r.log.entries[i].second;
    last += r.log.entries[cfg.steps - 1 - i].second;
  }
  CHECK(last < first);
}

TEST_CASE("mapper training") {
  const auto ae = Autoencoder::initialized(0);
  const auto before = ae;
  const auto tuples = small_tuples(400, 1);
  auto cfg = TrainConfig::mapper_defaults();
  const auto r = train_mapper(tuples, ae, cfg);
  REQUIRE_FALSE(r.failure);
  CHECK(ae == before);
  REQUIRE(r.epoch_rmse.size() == 10);
  CHECK(r.epoch_rmse.back() < r.epoch_rmse.front());
  CHECK(train_mapper(tuples, ae, cfg).model == r.model);

  const auto ends = small_tuples(200, 2, true);
  const auto trained = train_mapper(ends, ae, cfg);
  std::vector<LatentVec> za, zb, zm;
  std::vector<double> alpha;
  for (const auto& t : ends) {
    za.push_back(encode(t.a, ae));
    zb.push_back(encode(t.b, ae));
    zm.push_back(encode(t.morph, ae));
    alpha.push_back(t.alpha);
  }
  CHECK(mapper_embedding_rmse(za, zb, zm, alpha, trained.model) <
        mapper_embedding_rmse(za, zb, zm, alpha, Mapper::initialized(cfg.seed)));

  CHECK_THROWS_AS(train_mapper({}, ae, cfg), InvalidArgument);
}
