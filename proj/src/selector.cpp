#include "chansel/selector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace chansel {

int SelectorConfig::frames_window() const {
  const int d = static_cast<int>(std::lround(integration_time_s * sample_rate / hop));
  return std::max(d, 1);
}

std::vector<uint8_t> SelectorConfig::default_mask(int num_bins) {
  std::vector<uint8_t> mask(num_bins, 1);
  mask.front() = 0;  // DC carries no spatial information
  mask.back() = 0;   // Nyquist
  return mask;
}

void SelectorConfig::validate(int num_bins) const {
  if (integration_time_s <= 0.0)
    throw std::invalid_argument("SelectorConfig: integration time must be > 0");
  if (sample_rate <= 0.0 || hop <= 0) throw std::invalid_argument("SelectorConfig: bad cadence");
  if (!bin_mask.empty()) {
    if (static_cast<int>(bin_mask.size()) != num_bins)
      throw std::invalid_argument("SelectorConfig: bin mask size mismatch");
    if (std::find(bin_mask.begin(), bin_mask.end(), uint8_t(1)) == bin_mask.end())
      throw std::invalid_argument("SelectorConfig: bin mask is empty");
  }
}

SelectorState::SelectorState(int num_channels, int num_bins, const SelectorConfig& cfg)
    : num_channels_(num_channels), num_bins_(num_bins), window_(cfg.frames_window()), cfg_(cfg) {
  if (num_channels < 1 || num_bins < 1)
    throw std::invalid_argument("SelectorState: bad dimensions");
  cfg.validate(num_bins);
  mask_ = cfg.bin_mask.empty() ? SelectorConfig::default_mask(num_bins) : cfg.bin_mask;

  const size_t rk = static_cast<size_t>(num_channels) * num_bins;
  cross_.assign(rk, cdouble(0.0, 0.0));
  rr_.assign(rk, 0.0);
  bb_.assign(num_bins, 0.0);
  bb_raw_.assign(num_bins, 0.0);
  sigma_sum_.assign(num_bins, 0.0);
  ring_cross_.assign(rk * window_, cdouble(0.0, 0.0));
  ring_rr_.assign(rk * window_, 0.0);
  ring_bb_.assign(static_cast<size_t>(num_bins) * window_, 0.0);
  ring_bb_raw_.assign(static_cast<size_t>(num_bins) * window_, 0.0);
  ring_sigma_.assign(static_cast<size_t>(num_bins) * window_, 0.0);
}

void SelectorState::push_frame(std::span<const cdouble> y_bf, const Eigen::MatrixXcd& remotes,
                               std::span<const double> sigma2) {
  if (static_cast<int>(y_bf.size()) != num_bins_ ||
      static_cast<int>(sigma2.size()) != num_bins_ || remotes.rows() != num_channels_ ||
      remotes.cols() != num_bins_)
    throw std::invalid_argument("SelectorState::push_frame: dimension mismatch");
  for (int k = 0; k < num_bins_; ++k)
    if (mask_[k] && !(sigma2[k] > 0.0))
      throw std::invalid_argument("SelectorState::push_frame: invalid PSD at masked bin " +
                                  std::to_string(k));

  const bool evict = frames_pushed_ >= window_;
  const size_t rk = static_cast<size_t>(num_channels_) * num_bins_;
  cdouble* slot_cross = &ring_cross_[static_cast<size_t>(ring_pos_) * rk];
  double* slot_rr = &ring_rr_[static_cast<size_t>(ring_pos_) * rk];
  double* slot_bb = &ring_bb_[static_cast<size_t>(ring_pos_) * num_bins_];
  double* slot_bb_raw = &ring_bb_raw_[static_cast<size_t>(ring_pos_) * num_bins_];
  double* slot_sigma = &ring_sigma_[static_cast<size_t>(ring_pos_) * num_bins_];

  for (int k = 0; k < num_bins_; ++k) {
    if (!mask_[k]) continue;
    const double inv_sigma = 1.0 / sigma2[k];
    const cdouble ybf = y_bf[k];
    const double bb_contrib = std::norm(ybf) * inv_sigma;
    const double bb_raw_contrib = std::norm(ybf);

    if (evict) {
      bb_[k] -= slot_bb[k];
      bb_raw_[k] -= slot_bb_raw[k];
      sigma_sum_[k] -= slot_sigma[k];
    }
    bb_[k] += bb_contrib;
    bb_raw_[k] += bb_raw_contrib;
    sigma_sum_[k] += sigma2[k];
    slot_bb[k] = bb_contrib;
    slot_bb_raw[k] = bb_raw_contrib;
    slot_sigma[k] = sigma2[k];

    for (int r = 0; r < num_channels_; ++r) {
      const size_t i = idx(r, k);
      const cdouble yr = remotes(r, k);
      const cdouble cross_contrib = std::conj(yr) * ybf * inv_sigma;
      const double rr_contrib = std::norm(yr) * inv_sigma;
      if (evict) {
        cross_[i] -= slot_cross[i];
        rr_[i] -= slot_rr[i];
      }
      cross_[i] += cross_contrib;
      rr_[i] += rr_contrib;
      slot_cross[i] = cross_contrib;
      slot_rr[i] = rr_contrib;
    }
  }

  ++frames_pushed_;
  ring_pos_ = (ring_pos_ + 1) % window_;
}

double SelectorState::channel_score(int r) const {
  if (r < 0 || r >= num_channels_)
    throw std::invalid_argument("channel_score: channel out of range");
  double score = 0.0;
  for (int k = 0; k < num_bins_; ++k) {
    if (!mask_[k]) continue;
    const double srr = rr_[idx(r, k)];
    if (srr > 0.0) score += std::norm(cross_[idx(r, k)]) / srr;
  }
  return score;
}

cdouble SelectorState::estimate_scale(int r, int k) const {
  if (r < 0 || r >= num_channels_ || k < 0 || k >= num_bins_)
    throw std::invalid_argument("estimate_scale: index out of range");
  const double srr = rr_[idx(r, k)];
  if (!(srr > 0.0))
    throw NumericalError("estimate_scale: undefined scale, channel " + std::to_string(r) +
                         " has no energy at bin " + std::to_string(k));
  return cross_[idx(r, k)] / srr;
}

SelectorState::Decision SelectorState::select() const {
  Decision dec;
  dec.scores.resize(num_channels_);
  for (int r = 0; r < num_channels_; ++r) dec.scores[r] = channel_score(r);
  dec.channel = static_cast<int>(
      std::max_element(dec.scores.begin(), dec.scores.end()) - dec.scores.begin());

  dec.rho2.setZero(num_channels_, num_bins_);
  for (int r = 0; r < num_channels_; ++r) {
    for (int k = 0; k < num_bins_; ++k) {
      if (!mask_[k]) continue;
      const double denom = rr_[idx(r, k)] * bb_[k];
      if (denom > 0.0) {
        // Cauchy-Schwarz bounds this in [0,1]; clamp rounding spill.
        dec.rho2(r, k) = std::min(std::norm(cross_[idx(r, k)]) / denom, 1.0);
      }
    }
  }

  dec.gamma.assign(num_bins_, 1.0);
  if (cfg_.weighting == SelectorConfig::Weighting::oracle) {
    // Posterior SNR: window noisy PSD over window noise PSD.
    for (int k = 0; k < num_bins_; ++k)
      if (mask_[k] && sigma_sum_[k] > 0.0) dec.gamma[k] = bb_raw_[k] / sigma_sum_[k];
  }
  return dec;
}

}  // namespace chansel
