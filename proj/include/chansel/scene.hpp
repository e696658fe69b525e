#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "chansel/scenario.hpp"
#include "chansel/transfer.hpp"

namespace chansel {

// Concrete talker placement for one combo: target at position 0 (azimuth 0),
// N competing positions drawn without replacement, remote channels in a
// seeded order so the truth index is not systematically first.
struct ConcreteScene {
  int n_competing = 0;
  uint64_t combo_seed = 0;
  std::vector<int> occupied_positions;  // [0] is the target position
  std::vector<int> channel_order;       // channel -> occupied index
  int truth_channel = 0;
};

ConcreteScene build_scene(const Scenario& scenario, int n_competing, uint64_t combo_seed);

struct RenderedScene {
  // Mixtures.
  std::vector<std::vector<double>> ha_signals;       // M channels
  std::vector<std::vector<double>> remote_channels;  // R channels

  // Isolated components; mixtures equal their sums sample-exactly.
  std::vector<std::vector<std::vector<double>>> ha_stems;      // [source][mic]
  std::vector<std::vector<std::vector<double>>> remote_stems;  // [source][channel]
  std::vector<std::vector<double>> ha_noise;                   // [mic]
  std::vector<std::vector<double>> remote_noise;               // [channel]

  std::vector<double> own_voice;                 // stem at the reference mic (feeds V_0)
  std::vector<std::vector<double>> source_dry;   // dry stimulus per source (oracle VADs)

  int truth_channel = 0;
  ConcreteScene scene;
  double sample_rate = 16000.0;

  int num_sources() const { return static_cast<int>(ha_stems.size()); }
  int num_channels() const { return static_cast<int>(remote_channels.size()); }

  // Noise-only HA signals (competing talkers + background), for the
  // oracle-weighted selector.
  std::vector<std::vector<double>> ha_noise_only() const;
};

// Owns the impulse-response bank of a scenario; positions are fixed across
// combos, so RIRs are generated once and shared.
class SceneRenderer {
 public:
  explicit SceneRenderer(const Scenario& scenario);
  ~SceneRenderer();
  SceneRenderer(SceneRenderer&&) noexcept;

  RenderedScene render(const ConcreteScene& scene) const;

  // True frontal RATF of the HA array (position 0, reference mic 0).
  SteeringVector frontal_steering() const;
  // Steering after the scenario's configured perturbation.
  SteeringVector steering_for_run() const;

  const TransferFunctionSet& ha_transfers() const;
  const Scenario& scenario() const;
  // Steering vectors of the fixed table beams (beam-bank mode).
  const std::vector<SteeringVector>& beam_steering() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

// Scene export: multichannel WAVs, truth sidecar, steering CSV, and a
// manifest with content hashes.
void export_rendered_scene(const std::filesystem::path& dir, const RenderedScene& rendered,
                           const SceneRenderer& renderer, const Scenario& scenario);

}  // namespace chansel
