#pragma once

#include <filesystem>

#include "envmorph/neural/models.hpp"

namespace envmorph {

// Checkpoint layout (little-endian):
//   "EMCK" | u32 version | u32 model kind | u32 network count
//   per network: u32 layer count, then per layer u32 kind, in, out, kernel, stride
//   per network, per layer in declaration order: f32 weights, f32 biases
// Loading checks the descriptor against the expected architecture.

enum class ModelKind : std::uint32_t { Autoencoder = 1, Mapper = 2 };

void save_checkpoint(const Autoencoder& model, const std::filesystem::path& path);
void save_checkpoint(const Mapper& model, const std::filesystem::path& path);

/// Throws CorruptCheckpoint on bad magic, version, architecture or size, and
/// CheckpointMissing when the file does not exist.
Autoencoder load_autoencoder(const std::filesystem::path& path);
Mapper load_mapper(const std::filesystem::path& path);

}  // namespace envmorph
