#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "chansel/beamformer.hpp"
#include "chansel/selector.hpp"
#include "chansel/stft.hpp"
#include "chansel/transfer.hpp"

namespace chansel {

struct PipelineConfig {
  StftConfig stft;
  double alpha_y = 0.8465;
  double loading = 1e-6;
  double psd_init = 1e-6;
  double integration_time_s = 2.0;
  SelectorConfig::Weighting weighting = SelectorConfig::Weighting::approximation;

  SelectorConfig selector_config(int num_bins) const;
};

struct DecisionRecord {
  int frame = 0;
  double time_s = 0.0;
  int channel = 0;
  std::vector<double> scores;
};

struct SelectionRun {
  std::vector<DecisionRecord> decisions;
  int num_frames = 0;
  int warmup_frames = 0;       // covariance settling, no selector pushes
  int first_decision_frame = 0;  // warmup + window fill
  int window_frames = 0;

  // Correlation-diagnostic extrema observed across all decisions (raw,
  // unclamped values).
  double rho2_min = 0.0;
  double rho2_max = 0.0;

  BeamformerOutput bf;

  std::vector<int> decision_channels() const {
    std::vector<int> out;
    out.reserve(decisions.size());
    for (const auto& d : decisions) out.push_back(d.channel);
    return out;
  }
};

// Full selection pipeline on rendered (or recorded) audio: per-frame STFT,
// recursive noisy CPSDM, head-steered MPDR, PSD smoothing, windowed channel
// statistic, argmax decision each frame after warm-up.
//
// noise_only: isolated HA noise signals; required in oracle weighting mode.
// weight_sink: per-frame MPDR weights (mics x bins), for SNR reporting.
SelectionRun run_selection(const std::vector<std::vector<double>>& ha_signals,
                           const std::vector<std::vector<double>>& remote_channels,
                           const SteeringVector& steering, const PipelineConfig& cfg,
                           const std::vector<std::vector<double>>* noise_only = nullptr,
                           std::vector<Eigen::MatrixXcd>* weight_sink = nullptr);

// Same frame loop evaluated for several integration times at once; the
// beamformer path is shared, one selector window per entry. The
// BeamformerOutput is stored on the first run only.
std::vector<SelectionRun> run_selection_multi(
    const std::vector<std::vector<double>>& ha_signals,
    const std::vector<std::vector<double>>& remote_channels, const SteeringVector& steering,
    const PipelineConfig& cfg, const std::vector<double>& integration_times_s,
    const std::vector<std::vector<double>>* noise_only = nullptr,
    std::vector<Eigen::MatrixXcd>* weight_sink = nullptr);

// Per-frame decision log CSV: frame_index, time_s, selected_channel,
// score_0..score_{R-1}.
void write_decision_log(const std::filesystem::path& path, const SelectionRun& run);

// Final-frame per-bin weights, for inspection.
void write_weights_csv(const std::filesystem::path& path,
                       const std::vector<Eigen::MatrixXcd>& weights);

}  // namespace chansel
