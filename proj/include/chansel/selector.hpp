#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "chansel/common.hpp"

namespace chansel {

struct SelectorConfig {
  double integration_time_s = 2.0;
  double sample_rate = 16000.0;
  int hop = 256;
  std::vector<uint8_t> bin_mask;  // one entry per bin; empty -> default mask
  enum class Weighting { approximation, oracle };
  Weighting weighting = Weighting::approximation;

  // D = round(T_int * fs / hop), at least 1.
  int frames_window() const;
  // Default mask keeps every bin except DC and Nyquist.
  static std::vector<uint8_t> default_mask(int num_bins);
  void validate(int num_bins) const;
};

// Per-channel decision statistic over a sliding window of D frames.
//
// Tracks, per remote channel r and bin k, the three window sums
//   S_cross[r,k] = sum_j conj(Y_r) * Y_bf / sigma2
//   S_rr[r,k]    = sum_j |Y_r|^2 / sigma2
//   S_bb[k]      = sum_j |Y_bf|^2 / sigma2
// with exact eviction through a ring buffer of per-frame contributions.
class SelectorState {
 public:
  SelectorState(int num_channels, int num_bins, const SelectorConfig& cfg);

  // y_bf: K beamformer outputs, remotes: R x K, sigma2: K per-frame PSDs.
  // sigma2 must be strictly positive on masked bins.
  void push_frame(std::span<const cdouble> y_bf, const Eigen::MatrixXcd& remotes,
                  std::span<const double> sigma2);

  // score(r) = sum over masked bins of |S_cross|^2 / S_rr (zero-S_rr bins
  // contribute nothing).
  double channel_score(int r) const;

  // ML estimate of the relative scale between the beamformer output and
  // channel r at bin k: S_cross / S_rr.
  cdouble estimate_scale(int r, int k) const;

  struct Decision {
    int channel = 0;
    std::vector<double> scores;          // per channel
    Eigen::MatrixXd rho2;                // R x K windowed |rho|^2 in [0,1]
    std::vector<double> gamma;           // K posterior-SNR weights (oracle mode; else 1)
  };
  // Argmax of channel_score; ties resolve to the lowest channel index.
  Decision select() const;

  int num_channels() const { return num_channels_; }
  int num_bins() const { return num_bins_; }
  int window_frames() const { return window_; }
  long frames_pushed() const { return frames_pushed_; }
  bool window_full() const { return frames_pushed_ >= window_; }

  // Window-sum accessors (tests and diagnostics).
  cdouble sum_cross(int r, int k) const { return cross_[idx(r, k)]; }
  double sum_rr(int r, int k) const { return rr_[idx(r, k)]; }
  double sum_bb(int k) const { return bb_[k]; }

 private:
  size_t idx(int r, int k) const { return static_cast<size_t>(r) * num_bins_ + k; }

  int num_channels_;
  int num_bins_;
  int window_;
  SelectorConfig cfg_;
  std::vector<uint8_t> mask_;
  long frames_pushed_ = 0;
  int ring_pos_ = 0;

  // Window sums.
  std::vector<cdouble> cross_;    // R*K
  std::vector<double> rr_;        // R*K
  std::vector<double> bb_;        // K
  std::vector<double> bb_raw_;    // K, unweighted |Y_bf|^2 (gamma diagnostics)
  std::vector<double> sigma_sum_; // K

  // Ring buffer of per-frame contributions, D frames deep.
  std::vector<cdouble> ring_cross_;
  std::vector<double> ring_rr_;
  std::vector<double> ring_bb_;
  std::vector<double> ring_bb_raw_;
  std::vector<double> ring_sigma_;
};

}  // namespace chansel
