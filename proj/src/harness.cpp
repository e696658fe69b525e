#include "chansel/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

#include "chansel/baselines.hpp"
#include "chansel/vad.hpp"

namespace chansel {

double compute_pc(std::span<const int> decisions, int truth) {
  if (decisions.empty()) throw std::invalid_argument("compute_pc: empty decision sequence");
  long correct = 0;
  for (int d : decisions) correct += d == truth ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(decisions.size());
}

std::vector<double> compute_psr(std::span<const int> decisions, int num_channels) {
  if (decisions.empty()) throw std::invalid_argument("compute_psr: empty decision sequence");
  std::vector<double> hist(num_channels, 0.0);
  for (int d : decisions) {
    if (d < 0 || d >= num_channels) throw std::invalid_argument("compute_psr: decision out of range");
    hist[d] += 1.0;
  }
  for (double& h : hist) h /= static_cast<double>(decisions.size());
  return hist;
}

uint64_t combo_seed_for(uint64_t master_seed, int n, int combo) {
  return Rng::splitmix64(master_seed ^ Rng::splitmix64(static_cast<uint64_t>(n) * 0x10000u +
                                                       static_cast<uint64_t>(combo) + 1u));
}

namespace {

std::string join_semicolon(const std::vector<double>& v) {
  std::ostringstream ss;
  ss.precision(17);
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) ss << ";";
    ss << v[i];
  }
  return ss.str();
}

// Candidate VAD per remote channel: the dry signal of the talker the
// channel is associated with (its RM, or its beam target), silence when the
// beam points at an unoccupied position.
std::vector<VadSequence> candidate_vads(const Scenario& sc, const RenderedScene& rendered) {
  const ConcreteScene& scene = rendered.scene;
  std::vector<VadSequence> vads;
  const long L = static_cast<long>(rendered.remote_channels[0].size());
  const std::vector<double> silence(L, 0.0);

  for (int r = 0; r < rendered.num_channels(); ++r) {
    const std::vector<double>* dry = &silence;
    if (sc.mode == SceneMode::close_talking_rms) {
      dry = &rendered.source_dry[scene.channel_order[r]];
    } else {
      const double az = sc.beam_bank.azimuths_deg[scene.channel_order[r]];
      for (size_t si = 0; si < scene.occupied_positions.size(); ++si) {
        const double pos_az = 360.0 * scene.occupied_positions[si] / sc.geometry.num_azimuths;
        double diff = std::fmod(std::abs(pos_az - az), 360.0);
        diff = std::min(diff, 360.0 - diff);
        if (diff < 1e-9) dry = &rendered.source_dry[si];
      }
    }
    vads.push_back(oracle_vad(*dry, sc.stft));
  }
  return vads;
}

struct CellTask {
  int n = 0;
  int combo = 0;
  uint64_t seed = 0;
};

}  // namespace

ExperimentResult run_sweep(const Scenario& scenario, const RunOptions& options) {
  Scenario sc = scenario;
  if (options.paper_scale) sc.apply_paper_scale();
  if (options.seed_override) sc.sweep.master_seed = *options.seed_override;
  if (options.methods_override) sc.sweep.methods = *options.methods_override;
  if (options.t_int_override) sc.sweep.t_int_values = *options.t_int_override;
  sc.validate();

  const auto& methods = sc.sweep.methods;
  const auto& t_ints = sc.sweep.t_int_values;
  const bool want_proposed = std::count(methods.begin(), methods.end(), "proposed") > 0;
  const bool want_optimal = std::count(methods.begin(), methods.end(), "optimal") > 0;
  const bool want_ncc = std::count(methods.begin(), methods.end(), "ncc") > 0;
  const bool want_mog = std::count(methods.begin(), methods.end(), "mog") > 0;
  const bool want_random = std::count(methods.begin(), methods.end(), "random") > 0;

  const SceneRenderer renderer(sc);
  const SteeringVector steering = renderer.steering_for_run();

  std::vector<CellTask> tasks;
  for (int n : sc.sweep.n_values)
    for (int combo = 0; combo < sc.sweep.num_combos; ++combo)
      tasks.push_back({n, combo, combo_seed_for(sc.sweep.master_seed, n, combo)});

  PipelineConfig base_cfg;
  base_cfg.stft = sc.stft;
  base_cfg.alpha_y = sc.selector.alpha_y;
  base_cfg.loading = sc.selector.loading;

  const auto run_cell = [&](const CellTask& task) -> std::vector<ExperimentRow> {
    const ConcreteScene scene = build_scene(sc, task.n, task.seed);
    const RenderedScene rendered = renderer.render(scene);
    const int R = rendered.num_channels();

    std::vector<std::vector<double>> noise_only;
    if (want_optimal) noise_only = rendered.ha_noise_only();

    std::vector<SelectionRun> proposed_runs, optimal_runs;
    if (want_proposed) {
      PipelineConfig cfg = base_cfg;
      cfg.weighting = SelectorConfig::Weighting::approximation;
      proposed_runs = run_selection_multi(rendered.ha_signals, rendered.remote_channels,
                                          steering, cfg, t_ints);
    }
    if (want_optimal) {
      PipelineConfig cfg = base_cfg;
      cfg.weighting = SelectorConfig::Weighting::oracle;
      optimal_runs = run_selection_multi(rendered.ha_signals, rendered.remote_channels, steering,
                                         cfg, t_ints, &noise_only);
    }

    VadSequence v0;
    std::vector<VadSequence> cand_vads;
    if (want_ncc || want_mog) {
      v0 = oracle_vad(rendered.own_voice, sc.stft);
      cand_vads = candidate_vads(sc, rendered);
    }

    const int num_frames =
        stft_num_frames(static_cast<long>(rendered.ha_signals[0].size()), sc.stft);
    const int warmup = static_cast<int>(std::ceil(3.0 / (1.0 - sc.selector.alpha_y)));
    const int lag_range = static_cast<int>(
        std::lround(sc.selector.ncc_lag_range_s * sc.stft.sample_rate / sc.stft.hop));

    std::vector<ExperimentRow> rows;
    for (size_t ti = 0; ti < t_ints.size(); ++ti) {
      PipelineConfig tcfg = base_cfg;
      tcfg.integration_time_s = t_ints[ti];
      const int window = tcfg.selector_config(sc.stft.num_bins()).frames_window();
      const int first_decision = warmup + window - 1;
      if (first_decision >= num_frames)
        throw std::invalid_argument("run_sweep: T_int leaves no decision frames");

      for (const auto& method : methods) {
        std::vector<int> decisions;
        if (method == "proposed") {
          decisions = proposed_runs[ti].decision_channels();
        } else if (method == "optimal") {
          decisions = optimal_runs[ti].decision_channels();
        } else if (method == "ncc" || method == "mog") {
          decisions.reserve(num_frames - first_decision);
          for (int l = first_decision; l < num_frames; ++l)
            decisions.push_back(method == "ncc"
                                    ? ncc_select(v0, cand_vads, l, window, lag_range)
                                    : mog_select(v0, cand_vads, l, window));
        } else if (method == "random") {
          Rng rng(Rng(task.seed).fork(9000 + ti).seed());
          decisions.reserve(num_frames - first_decision);
          for (int l = first_decision; l < num_frames; ++l)
            decisions.push_back(random_select(R, rng));
        }

        ExperimentRow row;
        row.method = method;
        row.n = task.n;
        row.t_int_s = t_ints[ti];
        row.combo = task.combo;
        row.combo_seed = task.seed;
        row.p_c = compute_pc(decisions, rendered.truth_channel);
        row.p_s = compute_psr(decisions, R);
        row.frames_counted = static_cast<long>(decisions.size());
        row.excluded_warmup_frames = first_decision;
        rows.push_back(std::move(row));
      }

      if (options.decision_log_dir && want_proposed) {
        std::ostringstream name;
        name << "decisions_n" << task.n << "_t" << t_ints[ti] << "_c" << task.combo << ".csv";
        write_decision_log(*options.decision_log_dir / name.str(), proposed_runs[ti]);
      }
    }
    return rows;
  };

  // Combos run in parallel; rows are assembled in task order regardless of
  // completion order.
  std::vector<std::vector<ExperimentRow>> per_task(tasks.size());
  const int workers = std::max(options.workers, 1);
  if (workers == 1) {
    for (size_t i = 0; i < tasks.size(); ++i) per_task[i] = run_cell(tasks[i]);
  } else {
    size_t next = 0;
    while (next < tasks.size()) {
      const size_t batch = std::min<size_t>(workers, tasks.size() - next);
      std::vector<std::future<std::vector<ExperimentRow>>> futures;
      for (size_t i = 0; i < batch; ++i)
        futures.push_back(std::async(std::launch::async, run_cell, tasks[next + i]));
      for (size_t i = 0; i < batch; ++i) per_task[next + i] = futures[i].get();
      next += batch;
    }
  }

  ExperimentResult result;
  for (auto& rows : per_task)
    for (auto& row : rows) result.rows.push_back(std::move(row));

  // Aggregate across combos in (method, n, t_int) cells.
  for (const auto& method : methods) {
    for (int n : sc.sweep.n_values) {
      for (double t : t_ints) {
        AggregateRow agg;
        agg.method = method;
        agg.n = n;
        agg.t_int_s = t;
        std::vector<double> pcs;
        for (const auto& row : result.rows) {
          if (row.method != method || row.n != n || row.t_int_s != t) continue;
          pcs.push_back(row.p_c);
          agg.frames_counted += row.frames_counted;
          if (agg.mean_p_s.empty()) agg.mean_p_s.assign(row.p_s.size(), 0.0);
          for (size_t r = 0; r < row.p_s.size(); ++r) agg.mean_p_s[r] += row.p_s[r];
        }
        agg.num_combos = static_cast<int>(pcs.size());
        if (agg.num_combos == 0) continue;
        double mean = 0.0;
        for (double p : pcs) mean += p;
        mean /= agg.num_combos;
        double var = 0.0;
        for (double p : pcs) var += (p - mean) * (p - mean);
        agg.mean_p_c = mean;
        agg.std_p_c = agg.num_combos > 1 ? std::sqrt(var / (agg.num_combos - 1)) : 0.0;
        for (double& p : agg.mean_p_s) p /= agg.num_combos;
        result.aggregates.push_back(std::move(agg));
      }
    }
  }
  return result;
}

const AggregateRow& ExperimentResult::aggregate(const std::string& method, int n,
                                                double t_int) const {
  for (const auto& agg : aggregates)
    if (agg.method == method && agg.n == n && agg.t_int_s == t_int) return agg;
  throw std::invalid_argument("ExperimentResult: no aggregate for " + method + " n=" +
                              std::to_string(n) + " t=" + std::to_string(t_int));
}

void ExperimentResult::write_csv(std::ostream& os) const {
  os.precision(17);
  os << "method,n,t_int_s,combo,combo_seed,p_c,std_p_c,p_s,frames_counted,"
        "excluded_warmup_frames\n";
  for (const auto& row : rows) {
    os << row.method << "," << row.n << "," << row.t_int_s << "," << row.combo << ","
       << row.combo_seed << "," << row.p_c << ",," << join_semicolon(row.p_s) << ","
       << row.frames_counted << "," << row.excluded_warmup_frames << "\n";
  }
  for (const auto& agg : aggregates) {
    os << agg.method << "," << agg.n << "," << agg.t_int_s << ",summary,," << agg.mean_p_c << ","
       << agg.std_p_c << "," << join_semicolon(agg.mean_p_s) << "," << agg.frames_counted
       << ",\n";
  }
}

void ExperimentResult::write_csv(const std::filesystem::path& path) const {
  std::ofstream f(path);
  if (!f) throw SchemaError("cannot write results CSV: " + path.string());
  write_csv(f);
}

namespace {

double capped_snr_db(double signal_energy_val, double noise_energy_val) {
  if (signal_energy_val <= 0.0) return -120.0;
  if (noise_energy_val <= 0.0) return 120.0;
  return std::clamp(db_from_power_ratio(signal_energy_val / noise_energy_val), -120.0, 120.0);
}

}  // namespace

SnrReport snr_report(const RenderedScene& rendered, const SteeringVector& steering,
                     const PipelineConfig& cfg) {
  if (rendered.ha_stems.empty()) throw std::invalid_argument("snr_report: stems missing");
  SnrReport report;
  report.truth_channel = rendered.truth_channel;
  const int num_mics = static_cast<int>(rendered.ha_signals.size());
  const int R = rendered.num_channels();

  const auto noise_only = rendered.ha_noise_only();
  for (int m = 0; m < num_mics; ++m)
    report.input_snr_ha_db.push_back(
        capped_snr_db(signal_energy(rendered.ha_stems[0][m]), signal_energy(noise_only[m])));

  for (int r = 0; r < R; ++r) {
    double noise_energy = signal_energy(rendered.remote_noise[r]);
    for (int si = 1; si < rendered.num_sources(); ++si)
      noise_energy += signal_energy(rendered.remote_stems[si][r]);
    report.input_snr_remote_db.push_back(
        capped_snr_db(signal_energy(rendered.remote_stems[0][r]), noise_energy));
  }

  // Output SNR of the head-steered MPDR: the recorded per-frame weights
  // applied to the isolated target-stem and noise spectra.
  std::vector<Eigen::MatrixXcd> weights;
  run_selection(rendered.ha_signals, rendered.remote_channels, steering, cfg, nullptr, &weights);
  const StftFrameBlock target_stft = stft_analyze(rendered.ha_stems[0], cfg.stft);
  const StftFrameBlock noise_stft = stft_analyze(noise_only, cfg.stft);
  const int warmup = static_cast<int>(std::ceil(3.0 / (1.0 - cfg.alpha_y)));
  double sig = 0.0, noi = 0.0;
  for (int l = warmup; l < target_stft.num_frames(); ++l) {
    for (int k = 0; k < cfg.stft.num_bins(); ++k) {
      const Eigen::VectorXcd w = weights[l].col(k);
      Eigen::VectorXcd sv(num_mics), nv(num_mics);
      for (int m = 0; m < num_mics; ++m) {
        sv(m) = target_stft.at(l, k, m);
        nv(m) = noise_stft.at(l, k, m);
      }
      sig += std::norm(w.dot(sv));
      noi += std::norm(w.dot(nv));
    }
  }
  report.output_snr_ha_db = capped_snr_db(sig, noi);
  return report;
}

void SnrReport::write_csv(std::ostream& os) const {
  os.precision(10);
  os << "sensor,input_snr_db\n";
  for (size_t m = 0; m < input_snr_ha_db.size(); ++m)
    os << "ha_mic_" << m << "," << input_snr_ha_db[m] << "\n";
  for (size_t r = 0; r < input_snr_remote_db.size(); ++r)
    os << "remote_" << r << (static_cast<int>(r) == truth_channel ? "_target" : "") << ","
       << input_snr_remote_db[r] << "\n";
  os << "ha_mpdr_output," << output_snr_ha_db << "\n";
}

void write_run_manifest(const std::filesystem::path& path, const Scenario& scenario,
                        const std::optional<std::filesystem::path>& scenario_file,
                        uint64_t master_seed) {
  nlohmann::json j{
      {"tool", "chansel"},
      {"version", "0.1.0"},
      {"master_seed", master_seed},
      {"grid",
       {{"n_values", scenario.sweep.n_values},
        {"t_int_values", scenario.sweep.t_int_values},
        {"num_combos", scenario.sweep.num_combos},
        {"methods", scenario.sweep.methods}}},
  };
  if (scenario_file) {
    j["scenario_path"] = scenario_file->string();
    j["scenario_hash"] = hash_file(*scenario_file);
  }
  std::ofstream f(path);
  if (!f) throw SchemaError("cannot write run manifest: " + path.string());
  f << j.dump(2) << "\n";
}

}  // namespace chansel
