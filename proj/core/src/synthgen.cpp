#include "envmorph/synthgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "envmorph/errors.hpp"
#include "envmorph/rng.hpp"

namespace envmorph {
namespace {

constexpr double kGaussianSupport = 3.0;  // truncation in standard deviations

bool finite_all(std::initializer_list<double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double lerp_exact(double a, double b, double alpha) { return (1.0 - alpha) * a + alpha * b; }

std::array<double, kFrames> zero_frames() {
  std::array<double, kFrames> f;
  f.fill(0.0);
  return f;
}

// Snap centers that land on a frame to that frame, so integer-aligned
// templates are copied without interpolation.
double center_frame(double seconds) {
  const double c = seconds * kFrameRate;
  const double r = std::round(c);
  return std::abs(c - r) < 1e-9 ? r : c;
}

}  // namespace

double gaussian_sigma(double kernel_width) {
  return kernel_width / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

void ParamRanges::validate() const {
  if (!(quantity_min < quantity_max) || quantity_min < 1) {
    throw InvalidArgument("quantity range must satisfy 1 <= low < high");
  }
  if (!(ioi_min < ioi_max) || ioi_min < 0.0) throw InvalidArgument("bad ioi range");
  if (!(onset_min < onset_max) || onset_min < 0.0) throw InvalidArgument("bad onset range");
  if (!(amplitude_min < amplitude_max) || amplitude_min <= 0.0 || amplitude_max > 1.0) {
    throw InvalidArgument("amplitude range must lie in (0, 1]");
  }
}

// ---------------------------------------------------------------------------
// Templates

TemplateKernel::TemplateKernel(std::vector<float> samples, std::string name)
    : samples_(std::move(samples)), name_(std::move(name)) {
  if (samples_.empty()) throw InvalidArgument("template is empty");
  if (samples_.size() / kFrameRate > 1.0) throw InvalidArgument("template is longer than 1 s");
  for (float v : samples_) {
    if (!std::isfinite(v) || v < 0.0f) throw InvalidArgument("template values must be finite and >= 0");
  }
  const auto peak = std::max_element(samples_.begin(), samples_.end());
  if (*peak != 1.0f) throw InvalidArgument("template peak must be exactly 1");
  peak_index_ = static_cast<std::size_t>(peak - samples_.begin());
}

TemplateKernel TemplateKernel::from_envelope(const Envelope& e, std::size_t begin, std::size_t end,
                                             std::string name) {
  if (begin >= end || end > kFrames) throw InvalidArgument("bad template region");
  std::vector<float> s(e.frames().begin() + static_cast<std::ptrdiff_t>(begin),
                       e.frames().begin() + static_cast<std::ptrdiff_t>(end));
  const float peak = *std::max_element(s.begin(), s.end());
  if (!(peak > 0.0f)) throw InvalidArgument("template region is silent");
  for (float& v : s) v /= peak;
  *std::max_element(s.begin(), s.end()) = 1.0f;
  return TemplateKernel(std::move(s), std::move(name));
}

double effective_width(const ImpulseTrainSpec& spec, const ImpulseKernel& kernel) {
  if (const auto* t = std::get_if<TemplateKernel>(&kernel)) return t->length_seconds();
  return spec.kernel_width;
}

// ---------------------------------------------------------------------------
// Validation and rendering

bool validate_spec(const ImpulseTrainSpec& spec, const ImpulseKernel& kernel) {
  const double width = effective_width(spec, kernel);
  if (!finite_all({spec.onset, spec.ioi, spec.amplitude, width})) return false;
  if (spec.quantity < 0) return false;
  if (!(spec.amplitude > 0.0 && spec.amplitude <= 1.0)) return false;
  if (spec.onset < 0.0 || !(width > 0.0)) return false;
  if (spec.quantity >= 2 && (spec.ioi < 0.0 || spec.ioi < width)) return false;
  if (spec.quantity >= 1 && spec.onset + (spec.quantity - 1) * spec.ioi + width / 2.0 > kDuration) {
    return false;
  }
  return true;
}

bool validate_spec(const ImpulseTrainSpec& spec) { return validate_spec(spec, GaussianKernel{}); }

Envelope render_gaussian_train(const ImpulseTrainSpec& spec) {
  if (!validate_spec(spec)) throw InvalidSpec("render_gaussian_train: invalid impulse train spec");
  const double sigma = gaussian_sigma(spec.kernel_width);
  const double reach = kGaussianSupport * sigma;
  auto frames = zero_frames();
  for (int k = 0; k < spec.quantity; ++k) {
    const double center = spec.onset + k * spec.ioi;
    const auto first = static_cast<long>(std::ceil((center - reach) * kFrameRate));
    const auto last = static_cast<long>(std::floor((center + reach) * kFrameRate));
    for (long f = std::max(first, 0L); f <= std::min(last, static_cast<long>(kFrames) - 1); ++f) {
      const double dt = frame_time(static_cast<std::size_t>(f)) - center;
      if (std::abs(dt) > reach) continue;
      frames[f] += spec.amplitude * std::exp(-dt * dt / (2.0 * sigma * sigma));
    }
  }
  return Envelope::clamped(std::span<const double>(frames));
}

Envelope render_naturalistic_train(const ImpulseTrainSpec& spec, const TemplateKernel& kernel) {
  if (!validate_spec(spec, kernel)) {
    throw InvalidSpec("render_naturalistic_train: invalid spec for template '" + kernel.name() + "'");
  }
  const auto& tpl = kernel.samples();
  const double len = static_cast<double>(tpl.size());
  const double peak = static_cast<double>(kernel.peak_index());
  auto frames = zero_frames();
  for (int k = 0; k < spec.quantity; ++k) {
    const double c = center_frame(spec.onset + k * spec.ioi);
    const double start = c - peak;  // frame position of template sample 0
    const auto first = static_cast<long>(std::ceil(start));
    const auto last = static_cast<long>(std::floor(start + len - 1.0));
    for (long f = std::max(first, 0L); f <= std::min(last, static_cast<long>(kFrames) - 1); ++f) {
      const double u = static_cast<double>(f) - start;
      const auto i0 = static_cast<std::size_t>(std::floor(u));
      const double frac = u - static_cast<double>(i0);
      double v = tpl[i0];
      if (frac > 0.0 && i0 + 1 < tpl.size()) v = (1.0 - frac) * tpl[i0] + frac * tpl[i0 + 1];
      frames[f] += spec.amplitude * v;
    }
  }
  return Envelope::clamped(std::span<const double>(frames));
}

Envelope render_train(const ImpulseTrainSpec& spec, const ImpulseKernel& kernel) {
  if (const auto* t = std::get_if<TemplateKernel>(&kernel)) return render_naturalistic_train(spec, *t);
  return render_gaussian_train(spec);
}

// ---------------------------------------------------------------------------
// Axes

std::string axis_name(Axis axis) {
  switch (axis) {
    case Axis::Amplitude: return "amplitude";
    case Axis::Placement: return "placement";
    case Axis::Spacing: return "spacing";
    case Axis::Quantity: return "quantity";
  }
  return "?";
}

bool AxisFlags::has(Axis axis) const noexcept {
  switch (axis) {
    case Axis::Amplitude: return amplitude;
    case Axis::Placement: return placement;
    case Axis::Spacing: return spacing;
    case Axis::Quantity: return quantity;
  }
  return false;
}

void AxisFlags::set(Axis axis, bool on) noexcept {
  switch (axis) {
    case Axis::Amplitude: amplitude = on; break;
    case Axis::Placement: placement = on; break;
    case Axis::Spacing: spacing = on; break;
    case Axis::Quantity: quantity = on; break;
  }
}

std::string AxisFlags::name() const {
  std::string out;
  for (Axis axis : kAllAxes) {
    if (!has(axis)) continue;
    if (!out.empty()) out += '+';
    out += axis_name(axis);
  }
  return out.empty() ? "none" : out;
}

AxisFlags AxisFlags::parse(const std::string& text) {
  AxisFlags flags;
  if (text == "all") return {true, true, true, true};
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '+')) {
    bool matched = false;
    for (Axis axis : kAllAxes) {
      if (part == axis_name(axis)) {
        flags.set(axis, true);
        matched = true;
      }
    }
    if (!matched) throw InvalidArgument("unknown axis '" + part + "' in '" + text + "'");
  }
  if (flags.count() == 0) throw InvalidArgument("no axis named in '" + text + "'");
  return flags;
}

std::vector<AxisFlags> single_axis_combos() {
  std::vector<AxisFlags> out;
  for (Axis axis : kAllAxes) {
    AxisFlags f;
    f.set(axis, true);
    out.push_back(f);
  }
  return out;
}

std::vector<AxisFlags> compositional_combos() {
  std::vector<AxisFlags> out;
  for (int size = 2; size <= 4; ++size) {
    for (unsigned mask = 1; mask < 16; ++mask) {
      AxisFlags f{(mask & 1u) != 0, (mask & 2u) != 0, (mask & 4u) != 0, (mask & 8u) != 0};
      if (f.count() == size) out.push_back(f);
    }
  }
  return out;
}

AxisFlags AxisSet::flags() const noexcept {
  return {amplitude.has_value(), placement.has_value(), spacing.has_value(), quantity.has_value()};
}

const std::optional<AxisEndpoints>& AxisSet::endpoints(Axis axis) const noexcept {
  switch (axis) {
    case Axis::Amplitude: return amplitude;
    case Axis::Placement: return placement;
    case Axis::Spacing: return spacing;
    case Axis::Quantity: break;
  }
  return quantity;
}

std::optional<AxisEndpoints>& AxisSet::endpoints(Axis axis) noexcept {
  return const_cast<std::optional<AxisEndpoints>&>(std::as_const(*this).endpoints(axis));
}

void AxisSet::validate() const {
  if (flags().count() == 0) throw InvalidArgument("axis set varies no axis");
  for (Axis axis : kAllAxes) {
    const auto& ep = endpoints(axis);
    if (!ep) continue;
    if (!finite_all({ep->a, ep->b})) throw InvalidArgument(axis_name(axis) + " endpoint not finite");
    const bool ok = [&] {
      switch (axis) {
        case Axis::Amplitude: return ep->a > 0.0 && ep->a <= 1.0 && ep->b > 0.0 && ep->b <= 1.0;
        case Axis::Quantity:
          return ep->a >= 0.0 && ep->b >= 0.0 && ep->a == std::round(ep->a) && ep->b == std::round(ep->b);
        default: return ep->a >= 0.0 && ep->b >= 0.0;
      }
    }();
    if (!ok) throw InvalidArgument(axis_name(axis) + " endpoints out of range");
  }
}

int interpolate_quantity(double a, double b, double alpha) {
  return static_cast<int>(std::round(lerp_exact(a, b, alpha)));
}

ImpulseTrainSpec AxisSet::spec_at(double alpha) const {
  ImpulseTrainSpec s = context;
  if (amplitude) s.amplitude = lerp_exact(amplitude->a, amplitude->b, alpha);
  if (placement) s.onset = lerp_exact(placement->a, placement->b, alpha);
  if (spacing) s.ioi = lerp_exact(spacing->a, spacing->b, alpha);
  if (quantity) s.quantity = interpolate_quantity(quantity->a, quantity->b, alpha);
  return s;
}

Envelope dimension_envelope(const AxisSet& axes, double alpha, const ImpulseKernel& kernel) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  const auto spec = axes.spec_at(alpha);
  if (!validate_spec(spec, kernel)) throw InvalidSpec("interpolated spec is invalid");
  return render_train(spec, kernel);
}

// ---------------------------------------------------------------------------
// Tuples

namespace {

void draw_context(ImpulseTrainSpec& ctx, const AxisFlags& varied, const ParamRanges& r, Rng& rng) {
  // Draw every parameter so the generator advances identically regardless of
  // which axes vary.
  const double amplitude = uniform(rng, r.amplitude_min, r.amplitude_max);
  const double onset = uniform(rng, r.onset_min, r.onset_max);
  const double ioi = uniform(rng, r.ioi_min, r.ioi_max);
  const int quantity = uniform_int(rng, r.quantity_min, r.quantity_max);
  if (!varied.amplitude) ctx.amplitude = amplitude;
  if (!varied.placement) ctx.onset = onset;
  if (!varied.spacing) ctx.ioi = ioi;
  if (!varied.quantity) ctx.quantity = quantity;
}

void draw_endpoints(AxisSet& axes, const AxisFlags& flags, const ParamRanges& r, Rng& rng) {
  auto pair = [&](double lo, double hi) { return AxisEndpoints{uniform(rng, lo, hi), uniform(rng, lo, hi)}; };
  const auto amplitude = pair(r.amplitude_min, r.amplitude_max);
  const auto onset = pair(r.onset_min, r.onset_max);
  const auto ioi = pair(r.ioi_min, r.ioi_max);
  const int qa = uniform_int(rng, r.quantity_min, r.quantity_max);
  int qb = uniform_int(rng, r.quantity_min, r.quantity_max - 1);
  if (qb >= qa) ++qb;  // distinct endpoints
  axes.amplitude = flags.amplitude ? std::optional(amplitude) : std::nullopt;
  axes.placement = flags.placement ? std::optional(onset) : std::nullopt;
  axes.spacing = flags.spacing ? std::optional(ioi) : std::nullopt;
  axes.quantity = flags.quantity ? std::optional(AxisEndpoints{double(qa), double(qb)}) : std::nullopt;
}

bool tuple_specs_valid(const AxisSet& axes, double alpha, const ImpulseKernel& kernel) {
  return validate_spec(axes.spec_at(0.0), kernel) && validate_spec(axes.spec_at(alpha), kernel) &&
         validate_spec(axes.spec_at(1.0), kernel);
}

MorphTuple render_tuple(const AxisSet& axes, double alpha, std::uint64_t seed, const ImpulseKernel& kernel) {
  return MorphTuple{dimension_envelope(axes, 0.0, kernel), dimension_envelope(axes, 1.0, kernel),
                    dimension_envelope(axes, alpha, kernel), alpha, axes, seed};
}

}  // namespace

MorphTuple generate_tuple(const AxisSet& axes, double alpha, std::uint64_t seed,
                          const ImpulseKernel& kernel, const ParamRanges& ranges) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  axes.validate();
  ranges.validate();
  Rng rng(seed);
  AxisSet trial = axes;
  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    draw_context(trial.context, axes.flags(), ranges, rng);
    if (tuple_specs_valid(trial, alpha, kernel)) return render_tuple(trial, alpha, seed, kernel);
  }
  throw GenerationExhausted("no valid context for " + axes.flags().name() + " after " +
                            std::to_string(kMaxGenerationAttempts) + " attempts");
}

MorphTuple sample_tuple(const AxisFlags& flags, double alpha, std::uint64_t seed,
                        const ImpulseKernel& kernel, const ParamRanges& ranges) {
  if (flags.count() == 0) throw InvalidArgument("sample_tuple: no axis varies");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  ranges.validate();
  Rng rng(seed);
  AxisSet axes;
  axes.context.kernel_width = kDefaultKernelWidth;
  for (int attempt = 0; attempt < kMaxGenerationAttempts; ++attempt) {
    draw_endpoints(axes, flags, ranges, rng);
    for (int inner = 0; inner < kMaxGenerationAttempts; ++inner) {
      draw_context(axes.context, flags, ranges, rng);
      if (tuple_specs_valid(axes, alpha, kernel)) return render_tuple(axes, alpha, seed, kernel);
    }
  }
  throw GenerationExhausted("no valid endpoints for " + flags.name());
}

ImpulseTrainSpec midpoint_params(const ImpulseTrainSpec& a, const ImpulseTrainSpec& b) {
  if (!validate_spec(a) || !validate_spec(b)) throw InvalidSpec("midpoint_params: invalid input spec");
  ImpulseTrainSpec m;
  m.quantity = interpolate_quantity(a.quantity, b.quantity, 0.5);
  m.onset = (a.onset + b.onset) / 2.0;
  m.ioi = (a.ioi + b.ioi) / 2.0;
  m.amplitude = (a.amplitude + b.amplitude) / 2.0;
  m.kernel_width = (a.kernel_width + b.kernel_width) / 2.0;
  if (!validate_spec(m)) throw InvalidSpec("midpoint_params: midpoint spec is invalid");
  return m;
}

}  // namespace envmorph
