#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chansel/pipeline.hpp"
#include "chansel/scene.hpp"

namespace chansel {

// Fraction of decision frames selecting the true channel (Eq. 20 style).
double compute_pc(std::span<const int> decisions, int truth);
// Normalized selection histogram over channels; sums to one.
std::vector<double> compute_psr(std::span<const int> decisions, int num_channels);

struct ExperimentRow {
  std::string method;
  int n = 0;
  double t_int_s = 0.0;
  int combo = 0;
  uint64_t combo_seed = 0;
  double p_c = 0.0;
  std::vector<double> p_s;
  long frames_counted = 0;
  long excluded_warmup_frames = 0;
};

struct AggregateRow {
  std::string method;
  int n = 0;
  double t_int_s = 0.0;
  double mean_p_c = 0.0;
  double std_p_c = 0.0;
  std::vector<double> mean_p_s;
  long frames_counted = 0;
  int num_combos = 0;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<AggregateRow> aggregates;

  void write_csv(std::ostream& os) const;
  void write_csv(const std::filesystem::path& path) const;
  const AggregateRow& aggregate(const std::string& method, int n, double t_int) const;
};

struct RunOptions {
  int workers = 1;
  bool paper_scale = false;
  std::optional<uint64_t> seed_override;
  std::optional<std::vector<std::string>> methods_override;
  std::optional<std::vector<double>> t_int_override;
  std::optional<std::filesystem::path> decision_log_dir;
};

// Renders each (N, combo) cell once and evaluates every enabled method on
// the identical audio with the identical warm-up exclusion; deterministic
// under the master seed.
ExperimentResult run_sweep(const Scenario& scenario, const RunOptions& options = {});

uint64_t combo_seed_for(uint64_t master_seed, int n, int combo);

// Per-sensor input SNRs and beamformer output SNR from isolated stems.
struct SnrReport {
  std::vector<double> input_snr_ha_db;      // per HA mic
  std::vector<double> input_snr_remote_db;  // per remote channel
  double output_snr_ha_db = 0.0;            // head-steered MPDR output
  int truth_channel = 0;

  void write_csv(std::ostream& os) const;
};
SnrReport snr_report(const RenderedScene& rendered, const SteeringVector& steering,
                     const PipelineConfig& cfg);

// Machine-readable run provenance.
void write_run_manifest(const std::filesystem::path& path, const Scenario& scenario,
                        const std::optional<std::filesystem::path>& scenario_file,
                        uint64_t master_seed);

}  // namespace chansel
