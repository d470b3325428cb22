#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "envmorph/audio.hpp"
#include "envmorph/bench.hpp"
#include "envmorph/dataset.hpp"
#include "envmorph/engines.hpp"
#include "envmorph/errors.hpp"
#include "envmorph/extraction.hpp"
#include "envmorph/io.hpp"
#include "envmorph/neural/checkpoint.hpp"
#include "envmorph/neural/training.hpp"
#include "envmorph/stimuli.hpp"
#include "envmorph/templates.hpp"

namespace fs = std::filesystem;
using namespace envmorph;

namespace {

enum Exit { kOk = 0, kIo = 1, kUsage = 2, kNumeric = 3, kExpectation = 4 };

struct Globals {
  std::uint64_t seed = 0;
  int verbosity = 1;
};

void info(const Globals& g, const std::string& msg) {
  if (g.verbosity > 0) std::cout << msg << '\n';
}

std::vector<AxisFlags> parse_combos(const std::string& text) {
  if (text == "single") return single_axis_combos();
  if (text == "compositional") return compositional_combos();
  std::vector<AxisFlags> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(AxisFlags::parse(item));
  if (out.empty()) throw InvalidArgument("no axis combinations given");
  return out;
}

std::vector<TemplateKernel> load_templates(const std::vector<std::string>& wavs, bool bundled) {
  std::vector<TemplateKernel> out;
  for (const auto& w : wavs) out.push_back(template_from_wav(w));
  if (out.empty() && bundled) out = bundled_templates();
  return out;
}

Envelope load_input(const std::string& path, bool extract, const ExtractionConfig& cfg) {
  if (!extract) return load_envelope(path);
  return extract_envelope(read_wav(path).clip, cfg);
}

ToneSequenceSpec tone_spec(const std::vector<double>& v, double total_dur, double noise) {
  if (v.size() != 3) throw InvalidArgument("tone spec needs quantity,onset,ioi");
  ToneSequenceSpec s;
  s.quantity = static_cast<int>(v[0]);
  if (s.quantity != v[0]) throw InvalidArgument("tone quantity must be an integer");
  s.onset = v[1];
  s.ioi = v[2];
  s.total_dur = total_dur;
  s.noise_level = noise;
  return s;
}

std::vector<fs::path> env_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".env1") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string morph_csv(const Envelope& a, const Envelope& b, const Envelope& m) {
  std::ostringstream out;
  out.precision(9);
  out << "frame,time,a,b,morph\n";
  for (std::size_t i = 0; i < kFrames; ++i) {
    out << i << ',' << frame_time(i) << ',' << a[i] << ',' << b[i] << ',' << m[i] << '\n';
  }
  return out.str();
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal envelope morphing toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read options from a TOML/INI style file; flags win on conflict");

  Globals g;
  app.add_option("--seed", g.seed, "Base seed")->envname("ENVMORPH_SEED");
  app.add_flag_callback("-q,--quiet", [&] { g.verbosity = 0; }, "Only print errors");
  app.add_flag_callback("-v,--verbose", [&] { g.verbosity = 2; }, "Print training progress");

  ExtractionConfig ecfg;
  auto add_extraction = [&](CLI::App* sub) {
    sub->add_option("--cutoff", ecfg.lowpass_cutoff, "Lowpass cutoff in Hz")->capture_default_str();
    sub->add_option("--order", ecfg.filter_order, "Butterworth order")->capture_default_str();
    sub->add_option("--clip-duration", ecfg.clip_duration, "Seconds; shorter clips are zero-padded")
        ->capture_default_str();
  };

  // extract
  auto* extract = app.add_subcommand("extract", "Extract a 2048-frame envelope from a WAV file");
  std::string ex_in, ex_out;
  extract->add_option("input", ex_in, "Input WAV")->required()->check(CLI::ExistingFile);
  extract->add_option("output", ex_out, "Output .env1")->required();
  add_extraction(extract);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a morph-tuple dataset");
  std::string sy_out, sy_combos = "single", sy_alpha = "continuous";
  std::size_t sy_count = 10000;
  std::vector<std::string> sy_templates;
  bool sy_natural = false;
  synth->add_option("--out", sy_out, "Output directory")->required();
  synth->add_option("--count", sy_count, "Number of tuples")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--combos", sy_combos, "single, compositional, or a comma list like placement+spacing,all")
      ->capture_default_str();
  synth->add_option("--alpha", sy_alpha, "continuous or grid")->capture_default_str();
  synth->add_flag("--naturalistic", sy_natural, "Use impulse templates instead of Gaussians");
  synth->add_option("--template", sy_templates, "Impulse template WAV (repeatable; implies --naturalistic)")
      ->check(CLI::ExistingFile);

  // train-ae
  auto* train_ae = app.add_subcommand("train-ae", "Train the envelope autoencoder");
  std::string ae_out, ae_log, ae_envs;
  std::size_t ae_corpus = 10000;
  double ae_natural = 0.3;
  TrainConfig ae_cfg = TrainConfig::autoencoder_defaults();
  std::string ae_loss = "l1";
  train_ae->add_option("--out", ae_out, "Checkpoint path")->required();
  train_ae->add_option("--log", ae_log, "Loss curve CSV");
  train_ae->add_option("--steps", ae_cfg.steps, "Optimizer steps")->capture_default_str();
  train_ae->add_option("--batch", ae_cfg.batch_size, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
  train_ae->add_option("--lr", ae_cfg.adam.learning_rate, "Adam learning rate")->capture_default_str();
  train_ae->add_option("--final-lr-factor", ae_cfg.final_lr_factor, "Cosine decay target as a fraction of --lr")
      ->capture_default_str();
  train_ae->add_option("--loss", ae_loss, "l1 or rmse")->capture_default_str();
  train_ae->add_option("--corpus", ae_corpus, "Synthetic corpus size")->capture_default_str();
  train_ae->add_option("--natural-fraction", ae_natural, "Share of template-based trains in the corpus")
      ->capture_default_str();
  train_ae->add_option("--envelopes", ae_envs, "Directory of extra .env1 files added to the corpus")
      ->check(CLI::ExistingDirectory);

  // train-mapper
  auto* train_map = app.add_subcommand("train-mapper", "Train the twin mapper on frozen embeddings");
  std::string mp_ae, mp_out, mp_log, mp_combos = "single", mp_alpha = "continuous";
  std::size_t mp_count = 10000;
  TrainConfig mp_cfg = TrainConfig::mapper_defaults();
  std::string mp_loss = "rmse";
  train_map->add_option("--ae", mp_ae, "Autoencoder checkpoint")->required()->check(CLI::ExistingFile);
  train_map->add_option("--out", mp_out, "Checkpoint path")->required();
  train_map->add_option("--log", mp_log, "Loss curve CSV");
  train_map->add_option("--count", mp_count, "Training tuples")->capture_default_str()->check(CLI::PositiveNumber);
  train_map->add_option("--combos", mp_combos, "Axis combinations of the training tuples")->capture_default_str();
  train_map->add_option("--alpha", mp_alpha, "continuous or grid")->capture_default_str();
  train_map->add_option("--epochs", mp_cfg.epochs, "Epochs")->capture_default_str();
  train_map->add_option("--batch", mp_cfg.batch_size, "Batch size")->capture_default_str()->check(CLI::PositiveNumber);
  train_map->add_option("--lr", mp_cfg.adam.learning_rate, "Adam learning rate")->capture_default_str();
  train_map->add_option("--final-lr-factor", mp_cfg.final_lr_factor, "Cosine decay target as a fraction of --lr")
      ->capture_default_str();
  train_map->add_option("--loss", mp_loss, "l1 or rmse")->capture_default_str();

  // morph
  auto* morph = app.add_subcommand("morph", "Morph two envelopes");
  std::string mo_a, mo_b, mo_out, mo_csv, mo_engine = "audio-mix", mo_map = "identity", mo_ae, mo_mapper;
  double mo_alpha = 0.5;
  bool mo_extract = false;
  morph->add_option("a", mo_a, "First input (.env1, or WAV with --extract)")->required()->check(CLI::ExistingFile);
  morph->add_option("b", mo_b, "Second input")->required()->check(CLI::ExistingFile);
  morph->add_option("--out", mo_out, "Output .env1")->required();
  morph->add_option("--alpha", mo_alpha, "Morph weight; 0 gives a, 1 gives b")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  morph->add_option("--engine", mo_engine, "audio-mix, embed-mix, dtw or learned")->capture_default_str();
  morph->add_option("--alpha-map", mo_map, "identity, gamma:<p> or pwl:x:y,...")->capture_default_str();
  morph->add_option("--ae", mo_ae, "Autoencoder checkpoint")->check(CLI::ExistingFile);
  morph->add_option("--mapper", mo_mapper, "Mapper checkpoint")->check(CLI::ExistingFile);
  morph->add_option("--csv", mo_csv, "Side-by-side CSV of a, b and the morph");
  morph->add_flag("--extract", mo_extract, "Inputs are WAV files");
  add_extraction(morph);

  // bench
  auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
  std::string be_suite = "single-axis", be_out = "bench-out", be_exp, be_ae, be_mapper, be_combos, be_alpha = "continuous";
  std::string be_map = "identity";
  std::vector<std::string> be_engines{"audio-mix", "embed-mix", "dtw", "learned"};
  std::vector<std::string> be_templates;
  std::size_t be_count = 1000;
  bool be_strict = false;
  bench->add_option("--suite", be_suite, "single-axis, compositional or naturalistic")->capture_default_str();
  bench->add_option("--count", be_count, "Tuples per cell")->capture_default_str()->check(CLI::PositiveNumber);
  bench->add_option("--engines", be_engines, "Engines to evaluate (oracle allowed)")->delimiter(',')
      ->capture_default_str();
  bench->add_option("--combos", be_combos, "Override the suite's axis combinations");
  bench->add_option("--alpha", be_alpha, "continuous or grid")->capture_default_str();
  bench->add_option("--alpha-map", be_map, "Alpha map applied before every engine")->capture_default_str();
  bench->add_option("--ae", be_ae, "Autoencoder checkpoint");
  bench->add_option("--mapper", be_mapper, "Mapper checkpoint");
  bench->add_option("--template", be_templates, "Impulse template WAV for the naturalistic suite (repeatable)")
      ->check(CLI::ExistingFile);
  bench->add_option("--expectations", be_exp, "Ordering expectations file")->check(CLI::ExistingFile);
  bench->add_flag("--strict", be_strict, "Exit 4 when an expectation fails");
  bench->add_option("--out-dir", be_out, "Directory for results.json, report.csv and report.md")
      ->capture_default_str();

  // stimuli
  auto* stim = app.add_subcommand("stimuli", "Render tone-sequence listening stimuli");
  std::vector<double> st_a, st_b, st_render;
  std::string st_variant = "midpoint", st_out;
  double st_total = 6.0, st_noise = 0.01;
  stim->add_option("--a", st_a, "First input as quantity,onset,ioi")->delimiter(',')->expected(3);
  stim->add_option("--b", st_b, "Second input as quantity,onset,ioi")->delimiter(',')->expected(3);
  stim->add_option("--variant", st_variant, "midpoint, sequence, a, b or explicit")->capture_default_str();
  stim->add_option("--params", st_render, "Explicit quantity,onset,ioi for --variant explicit")
      ->delimiter(',')
      ->expected(3);
  stim->add_option("--total-dur", st_total, "Seconds per sequence")->capture_default_str();
  stim->add_option("--noise", st_noise, "Noise level")->capture_default_str();
  stim->add_option("--out", st_out, "Output WAV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*extract) {
      ecfg.validate();
      const auto wav = read_wav(ex_in);
      if (wav.downmixed()) {
        std::cerr << "note: " << wav.source_channels << " channels downmixed to mono\n";
      }
      const double dur = wav.clip.duration();
      const auto env = extract_envelope(wav.clip, ecfg);
      ensure_parent(ex_out);
      save_envelope(env, ex_out);
      std::ostringstream msg;
      msg << "wrote " << ex_out << ": peak " << env.peak() << ", mean " << env.mean() << ", source " << dur << " s";
      if (dur < ecfg.clip_duration) msg << " (zero-padded)";
      if (dur > ecfg.clip_duration) msg << " (truncated)";
      info(g, msg.str());
    } else if (*synth) {
      DatasetConfig dc;
      dc.count = sy_count;
      dc.base_seed = g.seed;
      dc.combos = parse_combos(sy_combos);
      dc.alpha = parse_alpha_sampling(sy_alpha);
      dc.templates = load_templates(sy_templates, sy_natural);
      const auto lines = generate_dataset(dc, sy_out);
      info(g, "wrote " + std::to_string(lines.size()) + " tuples to " + sy_out);
    } else if (*train_ae) {
      ae_cfg.seed = g.seed;
      ae_cfg.loss = nn::parse_loss(ae_loss);
      auto corpus = autoencoder_corpus(ae_corpus, g.seed, ae_natural);
      if (!ae_envs.empty()) {
        for (const auto& p : env_files(ae_envs)) corpus.push_back(load_envelope(p));
      }
      info(g, "training autoencoder on " + std::to_string(corpus.size()) + " envelopes");
      const auto res = train_autoencoder(corpus, ae_cfg, [&](std::size_t step, double loss) {
        if (g.verbosity > 1 && step % 100 == 0) std::cout << "step " << step << " loss " << loss << '\n';
      });
      ensure_parent(ae_out);
      save_checkpoint(res.model, ae_out);
      if (!ae_log.empty()) io::write_file_atomic(ae_log, res.log.to_csv());
      if (res.failure) {
        std::cerr << "error: " << *res.failure << "; saved the last finite parameters\n";
        return kNumeric;
      }
      if (!res.log.entries.empty()) {
        info(g, "final loss " + std::to_string(res.log.entries.back().second) + ", wrote " + ae_out);
      }
    } else if (*train_map) {
      mp_cfg.seed = g.seed;
      mp_cfg.loss = nn::parse_loss(mp_loss);
      const auto ae = load_autoencoder(mp_ae);
      DatasetConfig dc;
      dc.count = mp_count;
      dc.base_seed = g.seed;
      dc.combos = parse_combos(mp_combos);
      dc.alpha = parse_alpha_sampling(mp_alpha);
      const auto tuples = generate_tuples(dc);
      info(g, "training mapper on " + std::to_string(tuples.size()) + " tuples");
      const auto res = train_mapper(tuples, ae, mp_cfg);
      ensure_parent(mp_out);
      save_checkpoint(res.model, mp_out);
      if (!mp_log.empty()) io::write_file_atomic(mp_log, res.log.to_csv());
      if (res.failure) {
        std::cerr << "error: " << *res.failure << "; saved the last finite parameters\n";
        return kNumeric;
      }
      for (std::size_t e = 0; e < res.epoch_rmse.size(); ++e) {
        info(g, "epoch " + std::to_string(e + 1) + " embedding rmse " + std::to_string(res.epoch_rmse[e]));
      }
    } else if (*morph) {
      ecfg.validate();
      const auto kind = parse_engine_kind(mo_engine);
      EngineModels models;
      if (engine_needs_autoencoder(kind)) {
        if (mo_ae.empty()) throw InvalidArgument("--ae is required for engine " + mo_engine);
        models.autoencoder = std::make_shared<const Autoencoder>(load_autoencoder(mo_ae));
      }
      if (engine_needs_mapper(kind)) {
        if (mo_mapper.empty()) throw InvalidArgument("--mapper is required for engine " + mo_engine);
        models.mapper = std::make_shared<const Mapper>(load_mapper(mo_mapper));
      }
      const MorphEngine engine(kind, models, AlphaMap::parse(mo_map));
      const auto a = load_input(mo_a, mo_extract, ecfg);
      const auto b = load_input(mo_b, mo_extract, ecfg);
      const auto m = engine(a, b, mo_alpha);
      ensure_parent(mo_out);
      save_envelope(m, mo_out);
      if (!mo_csv.empty()) io::write_file_atomic(mo_csv, morph_csv(a, b, m));
      info(g, "wrote " + mo_out);
    } else if (*bench) {
      SuiteConfig sc;
      sc.kind = parse_suite_kind(be_suite);
      sc.count = be_count;
      sc.seed = g.seed;
      sc.engines = be_engines;
      if (!be_combos.empty()) sc.combos = parse_combos(be_combos);
      sc.alpha = parse_alpha_sampling(be_alpha);
      sc.alpha_map = AlphaMap::parse(be_map);
      sc.autoencoder_path = be_ae;
      sc.mapper_path = be_mapper;
      sc.templates = load_templates(be_templates, false);
      std::string expectations;
      if (!be_exp.empty()) {
        const auto bytes = io::read_file(be_exp);
        expectations.assign(bytes.begin(), bytes.end());
      }
      const auto result = run_suite(sc);
      const auto verdicts = check_orderings(result, expectations);
      fs::create_directories(be_out);
      io::write_file_atomic(fs::path(be_out) / "results.json", result.to_json());
      io::write_file_atomic(fs::path(be_out) / "report.csv", emit_table(result, TableFormat::Csv));
      const auto md = emit_table(result, TableFormat::Markdown);
      io::write_file_atomic(fs::path(be_out) / "report.md", md);
      if (g.verbosity > 0) std::cout << md;
      bool all_ok = true;
      for (const auto& v : verdicts) {
        all_ok = all_ok && v.passed;
        std::cout << (v.passed ? "PASS " : "FAIL ") << v.text;
        if (!v.passed) std::cout << "  [" << v.detail << "]";
        std::cout << '\n';
      }
      if (be_strict && !all_ok) return kExpectation;
    } else if (*stim) {
      AudioClip clip({0.0}, kStimulusRate);
      if (st_variant == "explicit") {
        clip = render_tone_sequence(tone_spec(st_render, st_total, st_noise), kStimulusRate, g.seed);
      } else {
        const auto a = tone_spec(st_a, st_total, st_noise);
        const auto b = tone_spec(st_b, st_total, st_noise);
        if (st_variant == "midpoint") {
          const auto m = midpoint_tone_spec(a, b);
          info(g, "midpoint: quantity " + std::to_string(m.quantity) + ", onset " + std::to_string(m.onset) +
                      " s, ioi " + std::to_string(m.ioi) + " s");
          clip = render_tone_sequence(m, kStimulusRate, g.seed);
        } else if (st_variant == "sequence") {
          clip = render_sequence_morph(a, b, kStimulusRate, g.seed);
        } else if (st_variant == "a") {
          clip = render_tone_sequence(a, kStimulusRate, g.seed);
        } else if (st_variant == "b") {
          clip = render_tone_sequence(b, kStimulusRate, g.seed);
        } else {
          throw InvalidArgument("unknown stimulus variant '" + st_variant + "'");
        }
      }
      ensure_parent(st_out);
      write_wav(clip, st_out);
      info(g, "wrote " + st_out);
    }
  } catch (const NumericFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const GenerationExhausted& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const CorruptFile& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
