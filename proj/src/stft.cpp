#include "chansel/stft.hpp"

#include <algorithm>
#include <stdexcept>

#include "chansel/fft.hpp"

namespace chansel {

void StftConfig::validate() const {
  if (sample_rate <= 0.0) throw std::invalid_argument("StftConfig: sample_rate must be > 0");
  if (frame_len < 2 || frame_len % 2 != 0)
    throw std::invalid_argument("StftConfig: frame_len must be even and >= 2");
  if (hop * 2 != frame_len)
    throw std::invalid_argument("StftConfig: hop must equal frame_len/2 (50% overlap)");
  if (fft_size < frame_len) throw std::invalid_argument("StftConfig: fft_size must be >= frame_len");
}

std::vector<double> make_window(int length, WindowKind kind) {
  if (length < 2 || length % 2 != 0)
    throw std::invalid_argument("make_window: length must be even and >= 2");
  std::vector<double> w(length);
  switch (kind) {
    case WindowKind::sqrt_hann:
      for (int n = 0; n < length; ++n) {
        const double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * n / length);
        w[n] = std::sqrt(std::max(hann, 0.0));
      }
      break;
  }
  return w;
}

StftFrameBlock::StftFrameBlock(const StftConfig& cfg, int num_frames, int num_channels)
    : config_(cfg),
      num_frames_(num_frames),
      num_bins_(cfg.num_bins()),
      num_channels_(num_channels),
      data_(static_cast<size_t>(num_frames) * num_bins_ * num_channels, cdouble(0.0, 0.0)) {
  cfg.validate();
  if (num_frames < 1 || num_channels < 1)
    throw std::invalid_argument("StftFrameBlock: need at least one frame and channel");
}

int stft_num_frames(long num_samples, const StftConfig& cfg) {
  if (num_samples < cfg.frame_len) return 0;
  return static_cast<int>((num_samples - cfg.frame_len) / cfg.hop) + 1;
}

StftFrameBlock stft_analyze(const std::vector<std::vector<double>>& signal, const StftConfig& cfg) {
  cfg.validate();
  if (signal.empty()) throw std::invalid_argument("stft_analyze: no channels");
  const long n = static_cast<long>(signal[0].size());
  for (const auto& ch : signal)
    if (static_cast<long>(ch.size()) != n)
      throw std::invalid_argument("stft_analyze: channel length mismatch");
  const int num_frames = stft_num_frames(n, cfg);
  if (num_frames < 1)
    throw std::invalid_argument("stft_analyze: signal shorter than one frame");

  const auto window = make_window(cfg.frame_len, cfg.window);
  StftFrameBlock block(cfg, num_frames, static_cast<int>(signal.size()));
  RealFft fft(cfg.fft_size);
  std::vector<double> frame(cfg.fft_size, 0.0);
  std::vector<cdouble> spec(cfg.num_bins());

  for (int c = 0; c < block.num_channels(); ++c) {
    const auto& x = signal[c];
    for (int l = 0; l < num_frames; ++l) {
      const long start = static_cast<long>(l) * cfg.hop;
      for (int i = 0; i < cfg.frame_len; ++i) frame[i] = x[start + i] * window[i];
      std::fill(frame.begin() + cfg.frame_len, frame.end(), 0.0);
      fft.forward(frame, spec);
      for (int k = 0; k < cfg.num_bins(); ++k) block.at(l, k, c) = spec[k];
    }
  }
  return block;
}

StftFrameBlock stft_analyze_mono(std::span<const double> signal, const StftConfig& cfg) {
  return stft_analyze({std::vector<double>(signal.begin(), signal.end())}, cfg);
}

std::vector<std::vector<double>> stft_synthesize(const StftFrameBlock& block) {
  const StftConfig& cfg = block.config();
  const auto window = make_window(cfg.frame_len, cfg.window);
  const long out_len = static_cast<long>(block.num_frames() - 1) * cfg.hop + cfg.frame_len;

  std::vector<std::vector<double>> out(block.num_channels(), std::vector<double>(out_len, 0.0));
  RealFft fft(cfg.fft_size);
  std::vector<cdouble> spec(cfg.num_bins());
  std::vector<double> frame(cfg.fft_size);

  for (int c = 0; c < block.num_channels(); ++c) {
    for (int l = 0; l < block.num_frames(); ++l) {
      for (int k = 0; k < cfg.num_bins(); ++k) spec[k] = block.at(l, k, c);
      fft.inverse(spec, frame);
      const long start = static_cast<long>(l) * cfg.hop;
      for (int i = 0; i < cfg.frame_len; ++i) out[c][start + i] += frame[i] * window[i];
    }
  }
  return out;
}

}  // namespace chansel
