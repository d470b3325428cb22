#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "envmorph/extraction.hpp"
#include "envmorph/synthgen.hpp"

namespace envmorph {

/// Discretized Gaussian of the given FWHM truncated at +-3 sigma, peak
/// centered on a frame.
TemplateKernel gaussian_template(double kernel_width = kDefaultKernelWidth);

/// The three bundled "recorded-style" impulse shapes: an exponential-decay
/// click, a double-peak knock and a noise-burst envelope. All fit within the
/// smallest inter-onset interval of the default ranges.
std::vector<TemplateKernel> bundled_templates();

/// Isolates the dominant impulse of a recorded single-impulse WAV: extracts
/// the envelope, then keeps the region around the peak where the envelope
/// stays above `floor` times the peak, capped at `max_seconds`.
TemplateKernel template_from_wav(const std::filesystem::path& path, const ExtractionConfig& cfg = {},
                                 double floor = 0.02, double max_seconds = 0.3);

/// Random impulse shape (attack/decay, optional second peak, optional
/// roughness) used to diversify the autoencoder corpus.
TemplateKernel random_template(std::uint64_t seed);

/// Autoencoder training corpus: Gaussian trains with every parameter drawn
/// from `ranges`, plus a `natural_fraction` share of trains built from
/// random templates.
std::vector<Envelope> autoencoder_corpus(std::size_t count, std::uint64_t seed,
                                         double natural_fraction = 0.3,
                                         const ParamRanges& ranges = {});

}  // namespace envmorph
