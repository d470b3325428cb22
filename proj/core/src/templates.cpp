#include "envmorph/templates.hpp"

#include <algorithm>
#include <cmath>

#include "envmorph/audio.hpp"
#include "envmorph/errors.hpp"
#include "envmorph/rng.hpp"

namespace envmorph {
namespace {

TemplateKernel normalized(std::vector<double> shape, std::string name) {
  const double peak = *std::max_element(shape.begin(), shape.end());
  std::vector<float> s(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) s[i] = static_cast<float>(std::max(0.0, shape[i] / peak));
  *std::max_element(s.begin(), s.end()) = 1.0f;
  return TemplateKernel(std::move(s), std::move(name));
}

// Moving-average smoothed uniform noise in [-1, 1].
std::vector<double> smooth_noise(std::size_t n, std::size_t width, Rng& rng) {
  std::vector<double> raw(n + width);
  for (double& v : raw) v = uniform(rng, -1.0, 1.0);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < width; ++k) out[i] += raw[i + k];
    out[i] /= static_cast<double>(width);
  }
  return out;
}

}  // namespace

TemplateKernel gaussian_template(double kernel_width) {
  const double sigma = gaussian_sigma(kernel_width);
  const auto half = static_cast<long>(std::floor(3.0 * sigma * kFrameRate));
  std::vector<double> s;
  for (long j = -half; j <= half; ++j) {
    const double dt = static_cast<double>(j) / kFrameRate;
    s.push_back(std::exp(-dt * dt / (2.0 * sigma * sigma)));
  }
  return normalized(std::move(s), "gaussian");
}

std::vector<TemplateKernel> bundled_templates() {
  std::vector<TemplateKernel> out;
  {
    std::vector<double> click(60);
    for (std::size_t i = 0; i < click.size(); ++i) {
      click[i] = i < 3 ? (i + 1) / 4.0 : std::exp(-(double(i) - 3.0) / 8.0);
    }
    out.push_back(normalized(std::move(click), "click"));
  }
  {
    std::vector<double> knock(56, 0.0);
    for (std::size_t i = 0; i < knock.size(); ++i) {
      const double t = static_cast<double>(i);
      if (i >= 2) knock[i] += std::exp(-(t - 2.0) / 5.0);
      else knock[i] += (t + 1.0) / 3.0;
      if (i >= 16) knock[i] += 0.7 * std::exp(-(t - 16.0) / 7.0);
      else if (i >= 13) knock[i] += 0.7 * (t - 12.0) / 4.0;
    }
    out.push_back(normalized(std::move(knock), "knock"));
  }
  {
    Rng rng(0x5EED0B0);
    const std::size_t n = 52;
    const auto rough = smooth_noise(n, 4, rng);
    std::vector<double> burst(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double phase = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      const double window = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * phase);
      burst[i] = window * (0.75 + 0.25 * rough[i]);
    }
    out.push_back(normalized(std::move(burst), "noise-burst"));
  }
  return out;
}

TemplateKernel template_from_wav(const std::filesystem::path& path, const ExtractionConfig& cfg,
                                 double floor, double max_seconds) {
  const auto wav = read_wav(path);
  const auto env = extract_envelope(wav.clip, cfg);
  const auto frames = env.frames();
  const auto peak_it = std::max_element(frames.begin(), frames.end());
  if (!(*peak_it > 0.0f)) throw TemplateMissing("template WAV is silent: " + path.string());
  const auto peak = static_cast<std::size_t>(peak_it - frames.begin());
  const float threshold = static_cast<float>(floor) * *peak_it;
  const auto cap = std::max<std::size_t>(1, static_cast<std::size_t>(max_seconds * kFrameRate));
  const std::size_t max_before = cap / 4;

  std::size_t begin = peak;
  while (begin > 0 && peak - begin < max_before && frames[begin - 1] > threshold) --begin;
  std::size_t end = peak + 1;
  while (end < kFrames && end - begin < cap && frames[end] > threshold) ++end;
  return TemplateKernel::from_envelope(env, begin, end, path.stem().string());
}

TemplateKernel random_template(std::uint64_t seed) {
  Rng rng(seed);
  const auto length = static_cast<std::size_t>(uniform_int(rng, 20, 60));
  const double attack = uniform(rng, 1.0, 8.0);
  const double sharpness = uniform(rng, 0.7, 2.5);
  const double decay = uniform(rng, 3.0, 20.0);
  const bool second = uniform01(rng) < 0.3;
  const double offset = uniform(rng, 8.0, 25.0);
  const double height = uniform(rng, 0.4, 0.9);
  const bool rough = uniform01(rng) < 0.3;
  const auto noise = smooth_noise(length, 3, rng);

  std::vector<double> s(length, 0.0);
  for (std::size_t i = 0; i < length; ++i) {
    const double t = static_cast<double>(i);
    s[i] = t < attack ? std::pow(t / attack, sharpness) : std::exp(-(t - attack) / decay);
    if (second && t >= offset) s[i] += height * std::exp(-(t - offset) / (0.8 * decay));
    if (rough) s[i] *= 1.0 + 0.2 * noise[i];
  }
  // Taper the tail so every template ends near zero.
  for (std::size_t i = 0; i < std::min<std::size_t>(4, length); ++i) {
    s[length - 1 - i] *= static_cast<double>(i + 1) / 5.0;
  }
  return normalized(std::move(s), "random");
}

std::vector<Envelope> autoencoder_corpus(std::size_t count, std::uint64_t seed, double natural_fraction,
                                         const ParamRanges& ranges) {
  ranges.validate();
  std::vector<Envelope> corpus;
  corpus.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, SeedStream::AutoencoderCorpus, i));
    ImpulseKernel kernel = GaussianKernel{};
    if (uniform01(rng) < natural_fraction) kernel = random_template(rng());
    bool done = false;
    for (int attempt = 0; attempt < kMaxGenerationAttempts && !done; ++attempt) {
      ImpulseTrainSpec spec;
      spec.amplitude = uniform(rng, ranges.amplitude_min, ranges.amplitude_max);
      spec.onset = uniform(rng, ranges.onset_min, ranges.onset_max);
      spec.ioi = uniform(rng, ranges.ioi_min, ranges.ioi_max);
      spec.quantity = uniform_int(rng, ranges.quantity_min, ranges.quantity_max);
      if (validate_spec(spec, kernel)) {
        corpus.push_back(render_train(spec, kernel));
        done = true;
      }
    }
    if (!done) throw GenerationExhausted("autoencoder corpus: no valid spec", i);
  }
  return corpus;
}

}  // namespace envmorph
