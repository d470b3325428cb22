#include "envmorph/extraction.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "envmorph/errors.hpp"

namespace envmorph {
namespace {

// fftw planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

class ComplexFft {
 public:
  explicit ComplexFft(std::size_t n)
      : n_(n), buf_(fftw_alloc_complex(n)) {
    std::lock_guard lock(planner_mutex());
    const int size = static_cast<int>(n);
    forward_ = fftw_plan_dft_1d(size, buf_.get(), buf_.get(), FFTW_FORWARD, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_1d(size, buf_.get(), buf_.get(), FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~ComplexFft() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  std::span<std::complex<double>> data() {
    return {reinterpret_cast<std::complex<double>*>(buf_.get()), n_};
  }
  void forward() { fftw_execute(forward_); }
  void inverse() { fftw_execute(inverse_); }

 private:
  std::size_t n_;
  std::unique_ptr<fftw_complex[], FftwDeleter> buf_;
  fftw_plan forward_{};
  fftw_plan inverse_{};
};

struct Biquad {
  double b0, b1, b2, a1, a2;
};

// Cascade of unit-DC-gain sections equivalent to a Butterworth lowpass of
// the given order, designed by the prewarped bilinear transform.
std::vector<Biquad> butterworth_sections(int order, double cutoff, double sample_rate) {
  const double k = std::tan(std::numbers::pi * cutoff / sample_rate);
  std::vector<Biquad> sections;
  for (int i = 0; i < order / 2; ++i) {
    const double angle = std::numbers::pi * (2.0 * i + 1.0) / (2.0 * order);
    const double q = 1.0 / (2.0 * std::sin(angle));
    const double norm = 1.0 / (1.0 + k / q + k * k);
    const double b0 = k * k * norm;
    sections.push_back({b0, 2.0 * b0, b0, 2.0 * (k * k - 1.0) * norm, (1.0 - k / q + k * k) * norm});
  }
  if (order % 2 == 1) {
    const double b = k / (1.0 + k);
    sections.push_back({b, b, 0.0, (k - 1.0) / (k + 1.0), 0.0});
  }
  return sections;
}

// Transposed direct form II, state initialised to the steady state of a
// constant input equal to the first sample.
void filter_in_place(std::vector<double>& x, const std::vector<Biquad>& sections) {
  if (x.empty()) return;
  for (const auto& s : sections) {
    const double x0 = x.front();
    double z2 = (s.b2 - s.a2) * x0;
    double z1 = (s.b1 - s.a1) * x0 + z2;
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}


}  // namespace

void ExtractionConfig::validate() const {
  if (!(lowpass_cutoff > 0.0)) throw InvalidArgument("lowpass cutoff must be positive");
  if (lowpass_cutoff >= kFrameRate / 2.0) {
    throw InvalidArgument("lowpass cutoff must be below half the envelope frame rate");
  }
  if (target_frames < 2) throw InvalidArgument("need at least two target frames");
  if (filter_order < 1) throw InvalidArgument("filter order must be at least 1");
  if (!(clip_duration > 0.0)) throw InvalidArgument("clip duration must be positive");
}

std::vector<double> analytic_magnitude(std::span<const double> signal) {
  if (signal.empty()) throw InvalidArgument("analytic_magnitude: empty input");
  for (double v : signal) {
    if (!std::isfinite(v)) throw InvalidArgument("analytic_magnitude: non-finite sample");
  }
  const std::size_t n = signal.size();
  // At least 2n so the transform is linear rather than circular: the end of a
  // clip must not see the onset at its start.
  const std::size_t size = std::bit_ceil(2 * n);
  ComplexFft fft(size);
  auto buf = fft.data();
  std::fill(buf.begin(), buf.end(), std::complex<double>{});
  std::copy(signal.begin(), signal.end(), buf.begin());
  fft.forward();
  // Keep DC and Nyquist, double positive bins, drop negative bins.
  for (std::size_t k = 1; k < size; ++k) {
    if (2 * k < size) {
      buf[k] *= 2.0;
    } else if (2 * k > size) {
      buf[k] = 0.0;
    }
  }
  fft.inverse();
  std::vector<double> out(n);
  const double scale = 1.0 / static_cast<double>(size);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::abs(buf[i]) * scale;
  return out;
}

std::vector<double> analytic_magnitude(const AudioClip& clip) {
  return analytic_magnitude(std::span<const double>(clip.samples()));
}

std::vector<double> lowpass(std::span<const double> signal, double sample_rate,
                            const ExtractionConfig& cfg) {
  if (!(sample_rate > 0.0)) throw InvalidArgument("lowpass: sample rate must be positive");
  if (!(cfg.lowpass_cutoff > 0.0) || cfg.lowpass_cutoff >= sample_rate / 2.0) {
    throw InvalidArgument("lowpass: cutoff " + std::to_string(cfg.lowpass_cutoff) +
                          " Hz is not below Nyquist");
  }
  if (cfg.filter_order < 1) throw InvalidArgument("lowpass: filter order must be at least 1");
  const std::size_t n = signal.size();
  if (n < 2) return {signal.begin(), signal.end()};

  const auto sections = butterworth_sections(cfg.filter_order, cfg.lowpass_cutoff, sample_rate);
  // Odd extension covering a few time constants of the filter.
  const auto settle = static_cast<std::size_t>(std::ceil(3.0 * sample_rate / cfg.lowpass_cutoff));
  const std::size_t pad = std::min(n - 1, std::max<std::size_t>(settle, 15));

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * signal[0] - signal[i]);
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * signal[n - 1] - signal[n - 1 - i]);

  filter_in_place(ext, sections);
  std::reverse(ext.begin(), ext.end());
  filter_in_place(ext, sections);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

std::vector<double> resample_frames(std::span<const double> signal, double /*source_rate*/,
                                    std::size_t target_frames) {
  if (target_frames < 1) throw InvalidArgument("resample_frames: target_frames must be >= 1");
  if (signal.empty()) throw InvalidArgument("resample_frames: empty input");
  const std::size_t n = signal.size();
  std::vector<double> out(target_frames);
  for (std::size_t k = 0; k < target_frames; ++k) {
    const std::size_t begin = k * n / target_frames;
    const std::size_t end = (k + 1) * n / target_frames;
    if (end <= begin) {
      out[k] = signal[std::min(begin, n - 1)];
      continue;
    }
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += signal[i];
    out[k] = sum / static_cast<double>(end - begin);
  }
  return out;
}

std::vector<double> extract_frames(const AudioClip& clip, const ExtractionConfig& cfg) {
  cfg.validate();
  const double rate = clip.sample_rate();
  const auto length = static_cast<std::size_t>(std::llround(cfg.clip_duration * rate));
  if (length == 0) throw InvalidArgument("extract: clip duration rounds to zero samples");
  std::vector<double> padded(length, 0.0);
  const auto& s = clip.samples();
  std::copy_n(s.begin(), std::min(length, s.size()), padded.begin());

  const auto magnitude = analytic_magnitude(std::span<const double>(padded));
  const auto smooth = lowpass(magnitude, rate, cfg);
  auto frames = resample_frames(smooth, rate, cfg.target_frames);

  const double peak = *std::max_element(frames.begin(), frames.end());
  if (peak > 1.0) {
    for (double& v : frames) v /= peak;
  }
  for (double& v : frames) v = std::clamp(v, 0.0, 1.0);
  return frames;
}

Envelope extract_envelope(const AudioClip& clip, const ExtractionConfig& cfg) {
  if (cfg.target_frames != kFrames) {
    throw InvalidArgument("extract_envelope requires target_frames == 2048");
  }
  return Envelope::clamped(std::span<const double>(extract_frames(clip, cfg)));
}

}  // namespace envmorph
