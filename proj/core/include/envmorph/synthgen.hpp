#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "envmorph/envelope.hpp"

namespace envmorph {

inline constexpr double kDefaultKernelWidth = 0.2;  // seconds, full width at half maximum

/// Parametric impulse train: `quantity` impulses centered at onset + k*ioi.
struct ImpulseTrainSpec {
  int quantity = 0;
  double onset = 0.0;      // seconds, center of the first impulse
  double ioi = 0.0;        // seconds between consecutive centers
  double amplitude = 1.0;  // peak value in (0, 1]
  double kernel_width = kDefaultKernelWidth;

  friend bool operator==(const ImpulseTrainSpec&, const ImpulseTrainSpec&) = default;
};

/// Gaussian standard deviation for a kernel of the given FWHM.
double gaussian_sigma(double kernel_width);

/// Sampling ranges for the four perceptual parameters.
struct ParamRanges {
  int quantity_min = 4;
  int quantity_max = 16;
  double ioi_min = 0.3;
  double ioi_max = 0.75;
  double onset_min = 0.01;
  double onset_max = 3.6;
  double amplitude_min = 0.2;
  double amplitude_max = 1.0;

  void validate() const;
};

/// Discretized impulse shape at the envelope frame rate, peak value 1.
class TemplateKernel {
 public:
  /// Throws InvalidArgument unless the snippet is nonempty, at most 1 s,
  /// nonnegative, finite, and peaks at exactly 1.
  explicit TemplateKernel(std::vector<float> samples, std::string name = "template");

  const std::vector<float>& samples() const noexcept { return samples_; }
  std::size_t peak_index() const noexcept { return peak_index_; }
  double length_seconds() const noexcept { return samples_.size() / kFrameRate; }
  const std::string& name() const noexcept { return name_; }

  /// Peak-normalized copy of an envelope region [begin, end).
  static TemplateKernel from_envelope(const Envelope& e, std::size_t begin, std::size_t end,
                                      std::string name = "template");

 private:
  std::vector<float> samples_;
  std::size_t peak_index_ = 0;
  std::string name_;
};

struct GaussianKernel {};

using ImpulseKernel = std::variant<GaussianKernel, TemplateKernel>;

/// Width used for the overlap and duration checks: the spec's kernel width for
/// Gaussian impulses, the template length for templates.
double effective_width(const ImpulseTrainSpec& spec, const ImpulseKernel& kernel);

bool validate_spec(const ImpulseTrainSpec& spec);
bool validate_spec(const ImpulseTrainSpec& spec, const ImpulseKernel& kernel);

Envelope render_gaussian_train(const ImpulseTrainSpec& spec);
Envelope render_naturalistic_train(const ImpulseTrainSpec& spec, const TemplateKernel& kernel);
Envelope render_train(const ImpulseTrainSpec& spec, const ImpulseKernel& kernel);

enum class Axis { Amplitude, Placement, Spacing, Quantity };
inline constexpr Axis kAllAxes[] = {Axis::Amplitude, Axis::Placement, Axis::Spacing,
                                    Axis::Quantity};

std::string axis_name(Axis axis);

/// Which perceptual axes vary in a morph. Named like "placement+quantity".
struct AxisFlags {
  bool amplitude = false;
  bool placement = false;
  bool spacing = false;
  bool quantity = false;

  int count() const noexcept { return amplitude + placement + spacing + quantity; }
  bool has(Axis axis) const noexcept;
  void set(Axis axis, bool on) noexcept;
  std::string name() const;
  /// Parses "amplitude", "placement+spacing", "all", ...
  static AxisFlags parse(const std::string& text);

  friend bool operator==(const AxisFlags&, const AxisFlags&) = default;
};

/// The four single-axis combinations.
std::vector<AxisFlags> single_axis_combos();
/// Every combination of at least two axes (11 of them), ordered by size.
std::vector<AxisFlags> compositional_combos();

struct AxisEndpoints {
  double a = 0.0;
  double b = 0.0;
  friend bool operator==(const AxisEndpoints&, const AxisEndpoints&) = default;
};

/// Varied axes with their endpoint values; fixed parameters come from `context`.
struct AxisSet {
  std::optional<AxisEndpoints> amplitude;
  std::optional<AxisEndpoints> placement;
  std::optional<AxisEndpoints> spacing;
  std::optional<AxisEndpoints> quantity;
  ImpulseTrainSpec context;

  AxisFlags flags() const noexcept;
  const std::optional<AxisEndpoints>& endpoints(Axis axis) const noexcept;
  std::optional<AxisEndpoints>& endpoints(Axis axis) noexcept;

  /// Throws InvalidArgument unless at least one axis varies and every
  /// endpoint is physically meaningful.
  void validate() const;

  /// Varied parameters interpolated as (1-alpha)*a + alpha*b, quantity
  /// rounded half away from zero; alpha = 0 and 1 reproduce the endpoints
  /// exactly.
  ImpulseTrainSpec spec_at(double alpha) const;

  friend bool operator==(const AxisSet&, const AxisSet&) = default;
};

/// Throws InvalidSpec when the interpolated spec is invalid for the kernel.
Envelope dimension_envelope(const AxisSet& axes, double alpha, const ImpulseKernel& kernel = GaussianKernel{});

struct MorphTuple {
  Envelope a;
  Envelope b;
  Envelope morph;
  double alpha = 0.0;
  AxisSet axes;
  std::uint64_t seed = 0;
};

inline constexpr int kMaxGenerationAttempts = 100;

/// Draws the fixed parameters of `axes.context` from `ranges` with a
/// generator seeded by `seed` until the specs at 0, alpha and 1 are all
/// valid. Throws GenerationExhausted after 100 attempts.
MorphTuple generate_tuple(const AxisSet& axes, double alpha, std::uint64_t seed,
                          const ImpulseKernel& kernel = GaussianKernel{},
                          const ParamRanges& ranges = {});

/// Also draws the endpoints of the varied axes; used by dataset and
/// benchmark generation.
MorphTuple sample_tuple(const AxisFlags& flags, double alpha, std::uint64_t seed,
                        const ImpulseKernel& kernel = GaussianKernel{},
                        const ParamRanges& ranges = {});

/// Field-wise arithmetic mean; quantity rounded. Throws InvalidSpec when the
/// result is not a valid spec.
ImpulseTrainSpec midpoint_params(const ImpulseTrainSpec& a, const ImpulseTrainSpec& b);

/// Interpolates quantity with the round-half-away-from-zero rule.
int interpolate_quantity(double a, double b, double alpha);

}  // namespace envmorph
