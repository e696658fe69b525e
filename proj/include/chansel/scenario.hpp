#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chansel/rir.hpp"
#include "chansel/selector.hpp"
#include "chansel/stft.hpp"
#include "chansel/stimulus.hpp"

namespace chansel {

enum class SceneMode { close_talking_rms, table_beam_bank };

struct GeometrySpec {
  Vec3 ha_position{3.0, 2.5, 1.5};
  double circle_radius_m = 1.9;
  int num_azimuths = 16;
  double talker_height_m = 1.5;
  double rm_offset_m = 0.2;         // RM distance in front of each talker
  double own_voice_offset_m = 0.1;  // mouth source in front of head center
  std::optional<std::filesystem::path> ha_ir_manifest;  // imported HA IR set
};

struct StimulusSpec {
  enum class Kind { synthetic, corpus } kind = Kind::synthetic;
  bool conversation = false;
  std::optional<std::filesystem::path> corpus_manifest;
  ConversationParams conversation_params;
};

struct SteeringSpec {
  enum class Mode { matched, rotate, jitter, file } mode = Mode::matched;
  double rotate_deg = 0.0;
  double jitter_mag = 0.0;
  double jitter_phase_rad = 0.0;
  uint64_t jitter_seed = 1;
  std::optional<std::filesystem::path> file;
};

struct SelectorSpec {
  double alpha_y = 0.8465;  // 96 ms time constant at 16 kHz / hop 256
  double loading = 1e-6;
  SelectorConfig::Weighting weighting = SelectorConfig::Weighting::approximation;
  double ncc_lag_range_s = 2.0;
};

struct BeamBankSpec {
  std::vector<double> azimuths_deg{0.0, 45.0, -45.0, 90.0, -90.0};
  Vec3 table_center{3.9, 2.5, 0.75};
  double table_radius_m = 0.05;
  int table_num_mics = 8;
};

struct SweepSpec {
  std::vector<int> n_values{2, 4, 6};
  std::vector<double> t_int_values{0.5, 2.0, 15.0};
  int num_combos = 5;
  uint64_t master_seed = 1234;
  std::vector<std::string> methods{"proposed"};
};

struct Scenario {
  int schema_version = 1;
  double duration_s = 30.0;
  double snr_db = 15.0;
  SceneMode mode = SceneMode::close_talking_rms;
  RoomSpec room;
  StftConfig stft;
  GeometrySpec geometry;
  StimulusSpec stimulus;
  SteeringSpec steering;
  SelectorSpec selector;
  BeamBankSpec beam_bank;
  SweepSpec sweep;

  std::filesystem::path base_dir;  // directory of the scenario file

  int max_competing() const { return geometry.num_azimuths - 1; }
  void validate() const;

  static Scenario from_file(const std::filesystem::path& path);
  static Scenario from_json_text(const std::string& text, const std::filesystem::path& base_dir);

  // The paper-scale grid (40 combos, N = 2..8, five integration times).
  void apply_paper_scale();
};

// FNV-1a of the scenario file bytes; recorded in run manifests.
uint64_t hash_file(const std::filesystem::path& path);

}  // namespace chansel
