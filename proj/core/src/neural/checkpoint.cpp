#include "envmorph/neural/checkpoint.hpp"

#include <string>

#include "envmorph/errors.hpp"
#include "envmorph/io.hpp"

namespace envmorph {
namespace {

constexpr char kMagic[] = "EMCK";
constexpr std::uint32_t kVersion = 1;

template <typename Params>
struct NetworkView {
  const std::vector<nn::LayerSpec>* layers;
  Params* params;
};

using ConstView = NetworkView<const std::vector<float>>;
using MutView = NetworkView<std::vector<float>>;

void write_checkpoint(ModelKind kind, const std::vector<ConstView>& nets, const std::filesystem::path& path) {
  io::ByteWriter w;
  w.put_bytes(kMagic);
  w.put_u32(kVersion);
  w.put_u32(static_cast<std::uint32_t>(kind));
  w.put_u32(static_cast<std::uint32_t>(nets.size()));
  for (const auto& net : nets) {
    w.put_u32(static_cast<std::uint32_t>(net.layers->size()));
    for (const auto& l : *net.layers) {
      w.put_u32(static_cast<std::uint32_t>(l.kind));
      w.put_u32(static_cast<std::uint32_t>(l.in));
      w.put_u32(static_cast<std::uint32_t>(l.out));
      w.put_u32(static_cast<std::uint32_t>(l.kernel));
      w.put_u32(static_cast<std::uint32_t>(l.stride));
    }
  }
  for (const auto& net : nets) {
    for (float v : *net.params) w.put_f32(v);
  }
  io::write_file_atomic(path, w.bytes());
}

void read_checkpoint(ModelKind kind, const std::vector<MutView>& nets, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw CheckpointMissing("checkpoint not found: " + path.string());
  const auto bytes = io::read_file(path);
  const auto where = " in " + path.string();
  io::ByteReader r(bytes);
  std::string magic;
  std::uint32_t version = 0, model = 0, count = 0;
  if (!r.get_bytes(4, magic) || magic != kMagic) throw CorruptCheckpoint("bad magic" + where);
  if (!r.get_u32(version) || version != kVersion) throw CorruptCheckpoint("unsupported version" + where);
  if (!r.get_u32(model) || model != static_cast<std::uint32_t>(kind)) {
    throw CorruptCheckpoint("checkpoint holds a different model kind" + where);
  }
  if (!r.get_u32(count) || count != nets.size()) throw CorruptCheckpoint("network count mismatch" + where);
  for (const auto& net : nets) {
    std::uint32_t layers = 0;
    if (!r.get_u32(layers) || layers != net.layers->size()) {
      throw CorruptCheckpoint("layer count mismatch" + where);
    }
    for (const auto& l : *net.layers) {
      std::uint32_t f[5];
      for (auto& v : f) {
        if (!r.get_u32(v)) throw CorruptCheckpoint("truncated architecture block" + where);
      }
      const bool same = f[0] == static_cast<std::uint32_t>(l.kind) && f[1] == static_cast<std::uint32_t>(l.in) &&
                        f[2] == static_cast<std::uint32_t>(l.out) && f[3] == static_cast<std::uint32_t>(l.kernel) &&
                        f[4] == static_cast<std::uint32_t>(l.stride);
      if (!same) throw CorruptCheckpoint("layer shape mismatch" + where);
    }
  }
  std::size_t expected = 0;
  for (const auto& net : nets) expected += net.params->size();
  if (r.remaining() != 4 * expected) throw CorruptCheckpoint("parameter payload size mismatch" + where);
  for (const auto& net : nets) {
    for (float& v : *net.params) r.get_f32(v);
  }
}

}  // namespace

void save_checkpoint(const Autoencoder& model, const std::filesystem::path& path) {
  write_checkpoint(ModelKind::Autoencoder,
                   {{&Autoencoder::encoder_layers(), &model.encoder_params()},
                    {&Autoencoder::decoder_layers(), &model.decoder_params()}},
                   path);
}

void save_checkpoint(const Mapper& model, const std::filesystem::path& path) {
  write_checkpoint(ModelKind::Mapper, {{&Mapper::layers(), &model.params()}}, path);
}

Autoencoder load_autoencoder(const std::filesystem::path& path) {
  Autoencoder m;
  read_checkpoint(ModelKind::Autoencoder,
                  {{&Autoencoder::encoder_layers(), &m.encoder_params()},
                   {&Autoencoder::decoder_layers(), &m.decoder_params()}},
                  path);
  return m;
}

Mapper load_mapper(const std::filesystem::path& path) {
  Mapper m;
  read_checkpoint(ModelKind::Mapper, {{&Mapper::layers(), &m.params()}}, path);
  return m;
}

}  // namespace envmorph
