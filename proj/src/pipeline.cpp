#include "chansel/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "chansel/cpsdm.hpp"

namespace chansel {

SelectorConfig PipelineConfig::selector_config(int num_bins) const {
  SelectorConfig sel;
  sel.integration_time_s = integration_time_s;
  sel.sample_rate = stft.sample_rate;
  sel.hop = stft.hop;
  sel.weighting = weighting;
  sel.bin_mask = SelectorConfig::default_mask(num_bins);
  return sel;
}

std::vector<SelectionRun> run_selection_multi(
    const std::vector<std::vector<double>>& ha_signals,
    const std::vector<std::vector<double>>& remote_channels, const SteeringVector& steering,
    const PipelineConfig& cfg, const std::vector<double>& integration_times_s,
    const std::vector<std::vector<double>>* noise_only,
    std::vector<Eigen::MatrixXcd>* weight_sink) {
  cfg.stft.validate();
  if (ha_signals.empty() || remote_channels.empty())
    throw std::invalid_argument("run_selection: need HA and remote signals");
  if (integration_times_s.empty())
    throw std::invalid_argument("run_selection: need at least one integration time");
  const bool oracle = cfg.weighting == SelectorConfig::Weighting::oracle;
  if (oracle && noise_only == nullptr)
    throw std::invalid_argument(
        "run_selection: oracle weighting unsupported without isolated noise signals");

  const int num_mics = static_cast<int>(ha_signals.size());
  const int num_channels = static_cast<int>(remote_channels.size());
  const int K = cfg.stft.num_bins();
  if (steering.num_mics() != num_mics || steering.num_bins() != K)
    throw std::invalid_argument("run_selection: steering dimensions mismatch");
  steering.validate();

  const StftFrameBlock ha = stft_analyze(ha_signals, cfg.stft);
  const StftFrameBlock remotes = stft_analyze(remote_channels, cfg.stft);
  std::optional<StftFrameBlock> noise;
  if (oracle) noise.emplace(stft_analyze(*noise_only, cfg.stft));
  const int num_frames = std::min(ha.num_frames(), remotes.num_frames());

  Cpsdm cov(num_mics, K, cfg.alpha_y);
  const int warmup = cov.warmup_frames();

  const int num_runs = static_cast<int>(integration_times_s.size());
  std::vector<SelectionRun> runs(num_runs);
  std::vector<SelectorState> states;
  states.reserve(num_runs);
  for (int i = 0; i < num_runs; ++i) {
    PipelineConfig run_cfg = cfg;
    run_cfg.integration_time_s = integration_times_s[i];
    states.emplace_back(num_channels, K, run_cfg.selector_config(K));
    SelectionRun& run = runs[i];
    run.num_frames = num_frames;
    run.warmup_frames = warmup;
    run.window_frames = states.back().window_frames();
    run.first_decision_frame = warmup + run.window_frames - 1;
    run.rho2_min = 1.0;
    run.rho2_max = 0.0;
    if (run.first_decision_frame >= num_frames)
      throw std::invalid_argument(
          "run_selection: integration time " + std::to_string(integration_times_s[i]) +
          " s leaves no decision frames after warm-up in a " + std::to_string(num_frames) +
          "-frame signal");
  }
  runs[0].bf.y_bf.setZero(num_frames, K);
  runs[0].bf.noisy_psd.setZero(num_frames, K);
  runs[0].bf.noise_psd.setZero(num_frames, K);
  if (weight_sink) weight_sink->assign(num_frames, Eigen::MatrixXcd::Zero(num_mics, K));

  // Recursive per-bin PSD smoothers, seeded like the covariance.
  std::vector<double> noisy_psd(K, cfg.psd_init);
  std::vector<double> noise_psd(K, cfg.psd_init);

  Eigen::MatrixXcd ha_frame(num_mics, K);
  Eigen::MatrixXcd remote_frame(num_channels, K);
  std::vector<cdouble> y_bf(K);
  std::vector<double> sigma2(K);

  for (int l = 0; l < num_frames; ++l) {
    for (int k = 0; k < K; ++k) {
      const auto y = ha.mic_vector(l, k);
      for (int m = 0; m < num_mics; ++m) ha_frame(m, k) = y[m];
      for (int r = 0; r < num_channels; ++r) remote_frame(r, k) = remotes.at(l, k, r);
    }
    cov.update(ha_frame);

    for (int k = 0; k < K; ++k) {
      const Eigen::VectorXcd w = mpdr_weights(cov.matrix(k), steering.bin(k), cfg.loading);
      if (weight_sink) (*weight_sink)[l].col(k) = w;
      const cdouble out = w.dot(ha_frame.col(k));
      y_bf[k] = out;
      noisy_psd[k] = cfg.alpha_y * noisy_psd[k] + (1.0 - cfg.alpha_y) * std::norm(out);
      if (oracle) {
        Eigen::VectorXcd v(num_mics);
        for (int m = 0; m < num_mics; ++m) v(m) = noise->at(l, k, m);
        const cdouble nout = w.dot(v);
        noise_psd[k] = cfg.alpha_y * noise_psd[k] + (1.0 - cfg.alpha_y) * std::norm(nout);
      }
      runs[0].bf.y_bf(l, k) = out;
      runs[0].bf.noisy_psd(l, k) = noisy_psd[k];
      runs[0].bf.noise_psd(l, k) = oracle ? noise_psd[k] : noisy_psd[k];
      sigma2[k] = oracle ? noise_psd[k] : noisy_psd[k];
    }

    if (l < warmup) continue;  // covariance still settling
    for (int i = 0; i < num_runs; ++i) {
      SelectorState& state = states[i];
      SelectionRun& run = runs[i];
      state.push_frame(y_bf, remote_frame, sigma2);
      if (l < run.first_decision_frame) continue;
      auto dec = state.select();
      for (int r = 0; r < num_channels; ++r) {
        for (int k = 0; k < K; ++k) {
          const double rho2 = dec.rho2(r, k);
          run.rho2_min = std::min(run.rho2_min, rho2);
          run.rho2_max = std::max(run.rho2_max, rho2);
        }
      }
      run.decisions.push_back({l, l * cfg.stft.hop / cfg.stft.sample_rate, dec.channel,
                               std::move(dec.scores)});
    }
  }
  return runs;
}

SelectionRun run_selection(const std::vector<std::vector<double>>& ha_signals,
                           const std::vector<std::vector<double>>& remote_channels,
                           const SteeringVector& steering, const PipelineConfig& cfg,
                           const std::vector<std::vector<double>>* noise_only,
                           std::vector<Eigen::MatrixXcd>* weight_sink) {
  auto runs = run_selection_multi(ha_signals, remote_channels, steering, cfg,
                                  {cfg.integration_time_s}, noise_only, weight_sink);
  return std::move(runs[0]);
}

void write_decision_log(const std::filesystem::path& path, const SelectionRun& run) {
  std::ofstream f(path);
  if (!f) throw SchemaError("cannot write decision log: " + path.string());
  const int num_channels =
      run.decisions.empty() ? 0 : static_cast<int>(run.decisions.front().scores.size());
  f << "frame_index,time_s,selected_channel";
  for (int r = 0; r < num_channels; ++r) f << ",score_" << r;
  f << "\n";
  f.precision(12);
  for (const auto& d : run.decisions) {
    f << d.frame << "," << d.time_s << "," << d.channel;
    for (double s : d.scores) f << "," << s;
    f << "\n";
  }
}

void write_weights_csv(const std::filesystem::path& path,
                       const std::vector<Eigen::MatrixXcd>& weights) {
  if (weights.empty()) throw std::invalid_argument("write_weights_csv: no weights recorded");
  std::ofstream f(path);
  if (!f) throw SchemaError("cannot write weights file: " + path.string());
  const Eigen::MatrixXcd& w = weights.back();
  f << "bin";
  for (int m = 0; m < w.rows(); ++m) f << ",re_" << m << ",im_" << m;
  f << "\n";
  f.precision(12);
  for (int k = 0; k < w.cols(); ++k) {
    f << k;
    for (int m = 0; m < w.rows(); ++m) f << "," << w(m, k).real() << "," << w(m, k).imag();
    f << "\n";
  }
}

}  // namespace chansel
