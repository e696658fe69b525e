#pragma once

#include <span>
#include <vector>

#include "chansel/common.hpp"

namespace chansel {

enum class WindowKind { sqrt_hann };

struct StftConfig {
  double sample_rate = 16000.0;
  int frame_len = 512;  // 32 ms at 16 kHz
  int hop = 256;        // 50% overlap
  int fft_size = 512;
  WindowKind window = WindowKind::sqrt_hann;

  int num_bins() const { return fft_size / 2 + 1; }
  double frame_rate_hz() const { return sample_rate / hop; }
  void validate() const;  // throws std::invalid_argument
};

// Periodic Hann to the given power; sqrt_hann is COLA at 50% overlap when
// used for both analysis and synthesis.
std::vector<double> make_window(int length, WindowKind kind);

// Complex spectra indexed (frame, bin, channel); only the non-negative
// frequency bins of the real-input transform are stored.
class StftFrameBlock {
 public:
  StftFrameBlock(const StftConfig& cfg, int num_frames, int num_channels);

  cdouble& at(int frame, int bin, int channel) {
    return data_[(static_cast<size_t>(frame) * num_bins_ + bin) * num_channels_ + channel];
  }
  const cdouble& at(int frame, int bin, int channel) const {
    return data_[(static_cast<size_t>(frame) * num_bins_ + bin) * num_channels_ + channel];
  }
  // Channel-contiguous M-vector for one (frame, bin).
  std::span<const cdouble> mic_vector(int frame, int bin) const {
    return {&at(frame, bin, 0), static_cast<size_t>(num_channels_)};
  }
  std::span<cdouble> mic_vector(int frame, int bin) {
    return {&at(frame, bin, 0), static_cast<size_t>(num_channels_)};
  }

  int num_frames() const { return num_frames_; }
  int num_bins() const { return num_bins_; }
  int num_channels() const { return num_channels_; }
  const StftConfig& config() const { return config_; }

  // First/last frames have partial window overlap; metrics exclude them.
  bool frame_is_edge(int frame) const { return frame == 0 || frame == num_frames_ - 1; }

 private:
  StftConfig config_;
  int num_frames_;
  int num_bins_;
  int num_channels_;
  std::vector<cdouble> data_;
};

// Frame l covers samples [l*hop, l*hop + frame_len); only complete frames.
StftFrameBlock stft_analyze(const std::vector<std::vector<double>>& signal, const StftConfig& cfg);
StftFrameBlock stft_analyze_mono(std::span<const double> signal, const StftConfig& cfg);

// Weighted overlap-add with the synthesis window equal to the analysis
// window; perfect reconstruction in steady state.
std::vector<std::vector<double>> stft_synthesize(const StftFrameBlock& block);

int stft_num_frames(long num_samples, const StftConfig& cfg);

}  // namespace chansel
