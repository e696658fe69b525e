#pragma once

#include <filesystem>
#include <vector>

#include "chansel/common.hpp"

namespace chansel {

enum class WavFormat { pcm16, float32 };

struct WavData {
  double sample_rate = 0.0;
  std::vector<std::vector<double>> channels;

  int num_channels() const { return static_cast<int>(channels.size()); }
  long num_samples() const { return channels.empty() ? 0 : static_cast<long>(channels[0].size()); }
};

// PCM 16-bit and IEEE float32 RIFF files, any channel count.
WavData read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path,
               const std::vector<std::vector<double>>& channels, double sample_rate,
               WavFormat format = WavFormat::float32);

}  // namespace chansel
