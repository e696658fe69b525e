#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "chansel/stft.hpp"

namespace chansel {

// Binary voice activity at STFT frame cadence.
struct VadSequence {
  std::vector<uint8_t> values;

  int num_frames() const { return static_cast<int>(values.size()); }
  double duty() const;
};

// Frame l is active iff its RMS exceeds the signal-global RMS scaled by
// threshold_db. Silence yields an all-zero sequence.
VadSequence oracle_vad(std::span<const double> clean_signal, const StftConfig& cfg,
                       double threshold_db = -40.0);

void write_vad_csv(const std::filesystem::path& path, const VadSequence& vad);
VadSequence read_vad_csv(const std::filesystem::path& path);

}  // namespace chansel
