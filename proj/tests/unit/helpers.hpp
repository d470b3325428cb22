#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "envmorph/envelope.hpp"
#include "envmorph/rng.hpp"

namespace testutil {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("envmorph_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline envmorph::Envelope random_envelope(envmorph::Rng& rng) {
  std::vector<float> v(envmorph::kFrames);
  for (auto& x : v) x = static_cast<float>(envmorph::uniform01(rng));
  return envmorph::Envelope(v);
}

inline std::vector<float> frames_of(const envmorph::Envelope& e) {
  return {e.frames().begin(), e.frames().end()};
}

}  // namespace testutil
