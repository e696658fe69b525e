#include "chansel/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "chansel/beamformer.hpp"
#include "chansel/cpsdm.hpp"
#include "chansel/fft.hpp"
#include "chansel/noise.hpp"
#include "chansel/rng.hpp"
#include "chansel/wav.hpp"

namespace chansel {

ConcreteScene build_scene(const Scenario& scenario, int n_competing, uint64_t combo_seed) {
  if (n_competing < 1 || n_competing > scenario.max_competing())
    throw std::invalid_argument("build_scene: N=" + std::to_string(n_competing) +
                                " outside 1.." + std::to_string(scenario.max_competing()));
  Rng rng((Rng(combo_seed).fork(1)).seed());

  ConcreteScene scene;
  scene.n_competing = n_competing;
  scene.combo_seed = combo_seed;
  scene.occupied_positions.push_back(0);  // target at azimuth 0
  for (int idx : rng.sample_without_replacement(scenario.geometry.num_azimuths - 1, n_competing))
    scene.occupied_positions.push_back(idx + 1);

  const int num_channels = scenario.mode == SceneMode::table_beam_bank
                               ? static_cast<int>(scenario.beam_bank.azimuths_deg.size())
                               : n_competing + 1;
  scene.channel_order.resize(num_channels);
  for (int i = 0; i < num_channels; ++i) scene.channel_order[i] = i;
  rng.shuffle(scene.channel_order);

  if (scenario.mode == SceneMode::table_beam_bank) {
    int frontal = 0;
    for (size_t b = 0; b < scenario.beam_bank.azimuths_deg.size(); ++b)
      if (scenario.beam_bank.azimuths_deg[b] == 0.0) frontal = static_cast<int>(b);
    scene.truth_channel = static_cast<int>(
        std::find(scene.channel_order.begin(), scene.channel_order.end(), frontal) -
        scene.channel_order.begin());
  } else {
    scene.truth_channel = static_cast<int>(
        std::find(scene.channel_order.begin(), scene.channel_order.end(), 0) -
        scene.channel_order.begin());
  }
  return scene;
}

std::vector<std::vector<double>> RenderedScene::ha_noise_only() const {
  std::vector<std::vector<double>> out = ha_noise;
  for (size_t s = 1; s < ha_stems.size(); ++s)  // source 0 is the target
    for (size_t m = 0; m < out.size(); ++m)
      for (size_t i = 0; i < out[m].size(); ++i) out[m][i] += ha_stems[s][m][i];
  return out;
}

namespace {

// Noise is disabled above this SNR (noise-free fixtures).
constexpr double kNoiseFreeSnrDb = 180.0;

std::vector<double> scaled(const std::vector<double>& x, double g) {
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] * g;
  return out;
}

}  // namespace

struct SceneRenderer::Impl {
  Scenario scenario;
  double fs;
  long num_samples;
  std::vector<Vec3> talker_pos;  // per azimuth position
  std::vector<Vec3> rm_pos;      // per azimuth position
  std::vector<Vec3> ha_mics;
  std::vector<Vec3> table_mics;
  Vec3 own_voice_pos;

  std::vector<std::vector<std::vector<double>>> ha_rirs;     // [pos][mic]
  std::vector<std::vector<std::vector<double>>> rm_rirs;     // [src pos][rm pos]
  std::vector<std::vector<std::vector<double>>> table_rirs;  // [pos][table mic]
  std::vector<double> own_rir_ref;
  long max_rir_len = 0;

  TransferFunctionSet ha_tf;
  TransferFunctionSet table_tf;
  std::vector<SteeringVector> beam_steer;
  std::vector<double> mag_template;
  std::unique_ptr<SpeechSource> speech;

  std::vector<double> rir(const Vec3& src, const Vec3& mic) const {
    return image_rir(scenario.room, src, mic, fs);
  }
};

SceneRenderer::SceneRenderer(const Scenario& scenario) : impl_(std::make_unique<Impl>()) {
  scenario.validate();
  Impl& s = *impl_;
  s.scenario = scenario;
  s.fs = scenario.stft.sample_rate;
  s.num_samples = static_cast<long>(std::llround(scenario.duration_s * s.fs));

  const GeometrySpec& g = scenario.geometry;
  SceneGeometry geo;
  geo.room_dims = scenario.room.dims;
  geo.ha_user_position = g.ha_position;
  geo.talker_positions = talker_circle(g.num_azimuths, g.circle_radius_m, g.talker_height_m);
  geo.validate();
  for (int i = 0; i < g.num_azimuths; ++i) {
    s.talker_pos.push_back(geo.talker_world(i));
    // RM between talker mouth and the HA user.
    const Vec3 toward_user = (g.ha_position - s.talker_pos.back());
    const Vec3 dir = Vec3{toward_user.x, toward_user.y, 0.0}.normalized();
    s.rm_pos.push_back(s.talker_pos.back() + dir * g.rm_offset_m);
  }
  for (int m = 0; m < geo.num_mics(); ++m) s.ha_mics.push_back(geo.ha_mic_world(m));
  s.own_voice_pos = g.ha_position + Vec3{g.own_voice_offset_m, 0.0, 0.0};

  if (scenario.mode == SceneMode::table_beam_bank) {
    const BeamBankSpec& b = scenario.beam_bank;
    for (int t = 0; t < b.table_num_mics; ++t) {
      const double az = 2.0 * kPi * t / b.table_num_mics;
      s.table_mics.push_back(b.table_center + Vec3{b.table_radius_m * std::cos(az),
                                                   b.table_radius_m * std::sin(az), 0.0});
    }
  }

  // Impulse-response bank; positions are combo-independent.
  const int num_pos = g.num_azimuths;
  s.ha_rirs.resize(num_pos);
  for (int p = 0; p < num_pos; ++p) {
    s.ha_rirs[p].resize(s.ha_mics.size());
    for (size_t m = 0; m < s.ha_mics.size(); ++m)
      s.ha_rirs[p][m] = s.rir(s.talker_pos[p], s.ha_mics[m]);
  }
  if (g.ha_ir_manifest) {
    // Imported measured HA IR set replaces the simulated one; sources are
    // matched to circle azimuths.
    IrSet imported = load_ir_set(*g.ha_ir_manifest, scenario.stft);
    if (imported.transfers.num_mics() != static_cast<int>(s.ha_mics.size()))
      throw SchemaError("HA IR set: mic count mismatch");
    for (int p = 0; p < num_pos; ++p) {
      const double want = geo.talker_positions[p].azimuth_deg;
      int found = -1;
      for (size_t i = 0; i < imported.azimuths_deg.size(); ++i) {
        double diff = std::fmod(std::abs(imported.azimuths_deg[i] - want), 360.0);
        diff = std::min(diff, 360.0 - diff);
        if (diff < 1e-6) found = static_cast<int>(i);
      }
      if (found < 0)
        throw SchemaError("HA IR set: no source at azimuth " + std::to_string(want));
      s.ha_rirs[p] = imported.transfers.impulse_responses[found];
    }
  }

  if (scenario.mode == SceneMode::close_talking_rms) {
    s.rm_rirs.resize(num_pos);
    for (int p = 0; p < num_pos; ++p) {
      s.rm_rirs[p].resize(num_pos);
      for (int r = 0; r < num_pos; ++r) s.rm_rirs[p][r] = s.rir(s.talker_pos[p], s.rm_pos[r]);
    }
  } else {
    s.table_rirs.resize(num_pos);
    for (int p = 0; p < num_pos; ++p) {
      s.table_rirs[p].resize(s.table_mics.size());
      for (size_t t = 0; t < s.table_mics.size(); ++t)
        s.table_rirs[p][t] = s.rir(s.talker_pos[p], s.table_mics[t]);
    }
  }
  s.own_rir_ref = s.rir(s.own_voice_pos, s.ha_mics[0]);

  for (const auto& bank : {std::cref(s.ha_rirs), std::cref(s.rm_rirs), std::cref(s.table_rirs)})
    for (const auto& src : bank.get())
      for (const auto& ir : src) s.max_rir_len = std::max(s.max_rir_len, static_cast<long>(ir.size()));
  s.max_rir_len = std::max(s.max_rir_len, static_cast<long>(s.own_rir_ref.size()));

  s.ha_tf = atfs_from_rirs(s.ha_rirs, scenario.stft.fft_size);
  if (scenario.mode == SceneMode::table_beam_bank) {
    s.table_tf = atfs_from_rirs(s.table_rirs, scenario.stft.fft_size);
    for (double az : scenario.beam_bank.azimuths_deg) {
      // Steer each fixed beam with the true ATF of its target position.
      int pos = -1;
      for (int p = 0; p < num_pos; ++p) {
        double diff = std::fmod(std::abs(geo.talker_positions[p].azimuth_deg - az), 360.0);
        diff = std::min(diff, 360.0 - diff);
        if (diff < 1e-9) pos = p;
      }
      if (pos < 0)
        throw SchemaError("beam bank azimuth " + std::to_string(az) +
                          " is not one of the candidate positions");
      s.beam_steer.push_back(ratf_from_atf(s.table_tf, pos, 0));
    }
  }

  s.mag_template = ltass_template(scenario.stft.fft_size, s.fs);
  if (scenario.stimulus.kind == StimulusSpec::Kind::corpus) {
    s.speech = std::make_unique<SpeechSource>(
        load_speech_corpus(*scenario.stimulus.corpus_manifest, s.fs));
  } else {
    s.speech = std::make_unique<SpeechSource>(s.mag_template, scenario.stft.fft_size, s.fs);
  }
}

SceneRenderer::~SceneRenderer() = default;
SceneRenderer::SceneRenderer(SceneRenderer&&) noexcept = default;

const TransferFunctionSet& SceneRenderer::ha_transfers() const { return impl_->ha_tf; }
const Scenario& SceneRenderer::scenario() const { return impl_->scenario; }
const std::vector<SteeringVector>& SceneRenderer::beam_steering() const {
  return impl_->beam_steer;
}

SteeringVector SceneRenderer::frontal_steering() const {
  return ratf_from_atf(impl_->ha_tf, 0, 0);
}

SteeringVector SceneRenderer::steering_for_run() const {
  const SteeringSpec& spec = impl_->scenario.steering;
  SteeringVector d = frontal_steering();
  switch (spec.mode) {
    case SteeringSpec::Mode::matched:
      return d;
    case SteeringSpec::Mode::rotate: {
      SteeringPerturbation p;
      p.kind = SteeringPerturbation::Kind::rotate;
      p.atfs = &impl_->ha_tf;
      for (const auto& t :
           talker_circle(impl_->scenario.geometry.num_azimuths,
                         impl_->scenario.geometry.circle_radius_m,
                         impl_->scenario.geometry.talker_height_m))
        p.source_azimuths_deg.push_back(t.azimuth_deg);
      p.rotate_deg = spec.rotate_deg;
      return perturb_steering(d, p);
    }
    case SteeringSpec::Mode::jitter:
      return jitter_steering(d, spec.jitter_mag, spec.jitter_phase_rad, spec.jitter_seed);
    case SteeringSpec::Mode::file:
      return read_steering_csv(*spec.file);
  }
  return d;
}

namespace {

// Fixed MPDR beams at the table array: weights per frame from the table
// mixture covariance, applied to mixture and stems alike so the remote
// channels decompose exactly.
void render_beams(const SceneRenderer::Impl& s, RenderedScene& out, const ConcreteScene& scene,
                  ConvolutionPlan& plan, const std::vector<std::vector<cdouble>>& dry_spec,
                  const std::vector<std::vector<double>>& iso, double noise_scale) {
  const Scenario& sc = s.scenario;
  const long L = static_cast<long>(out.source_dry[0].size());
  const int num_sources = static_cast<int>(scene.occupied_positions.size());
  const int num_table = static_cast<int>(s.table_mics.size());
  const int num_beams = static_cast<int>(s.beam_steer.size());
  const int num_ha_mics = static_cast<int>(s.ha_mics.size());
  const StftConfig& cfg = sc.stft;
  const int K = cfg.num_bins();

  // Table-mic time signals: per-source stems plus the diffuse noise.
  std::vector<std::vector<std::vector<double>>> table_stems(
      num_sources, std::vector<std::vector<double>>(num_table, std::vector<double>(L, 0.0)));
  for (int si = 0; si < num_sources; ++si) {
    const int pos = scene.occupied_positions[si];
    for (int t = 0; t < num_table; ++t) {
      const auto rir_spec = plan.spectrum(s.table_rirs[pos][t]);
      plan.product(dry_spec[si], rir_spec, table_stems[si][t]);
    }
  }
  std::vector<std::vector<double>> table_noise(num_table, std::vector<double>(L, 0.0));
  if (!iso.empty())
    for (int t = 0; t < num_table; ++t)
      for (long i = 0; i < L; ++i) table_noise[t][i] = iso[num_ha_mics + t][i] * noise_scale;

  std::vector<std::vector<double>> table_mix(num_table, std::vector<double>(L, 0.0));
  for (int t = 0; t < num_table; ++t) {
    for (int si = 0; si < num_sources; ++si)
      for (long i = 0; i < L; ++i) table_mix[t][i] += table_stems[si][t][i];
    for (long i = 0; i < L; ++i) table_mix[t][i] += table_noise[t][i];
  }

  // channel index of each beam under the seeded channel order.
  std::vector<int> channel_of(num_beams);
  for (int r = 0; r < num_beams; ++r) channel_of[scene.channel_order[r]] = r;

  const int num_frames = stft_num_frames(L, cfg);
  const auto window = make_window(cfg.frame_len, cfg.window);
  RealFft fft(cfg.fft_size);
  Cpsdm cov(num_table, K, sc.selector.alpha_y);

  std::vector<double> frame_buf(cfg.fft_size, 0.0);
  // Per-bin spectra of the mixture and each component for the current frame.
  Eigen::MatrixXcd mix_frame(num_table, K);
  std::vector<Eigen::MatrixXcd> comp_frames(num_sources + 1, Eigen::MatrixXcd(num_table, K));
  std::vector<cdouble> spec(K);
  std::vector<std::vector<cdouble>> beam_comp(num_sources + 1, std::vector<cdouble>(K));
  std::vector<double> synth(cfg.fft_size);

  const auto analyze_frame = [&](const std::vector<std::vector<double>>& sig, int l,
                                 Eigen::MatrixXcd& dst) {
    const long start = static_cast<long>(l) * cfg.hop;
    for (int t = 0; t < num_table; ++t) {
      for (int i = 0; i < cfg.frame_len; ++i) frame_buf[i] = sig[t][start + i] * window[i];
      std::fill(frame_buf.begin() + cfg.frame_len, frame_buf.end(), 0.0);
      fft.forward(frame_buf, spec);
      for (int k = 0; k < K; ++k) dst(t, k) = spec[k];
    }
  };

  for (int l = 0; l < num_frames; ++l) {
    analyze_frame(table_mix, l, mix_frame);
    for (int si = 0; si < num_sources; ++si) analyze_frame(table_stems[si], l, comp_frames[si]);
    analyze_frame(table_noise, l, comp_frames[num_sources]);
    cov.update(mix_frame);

    for (int b = 0; b < num_beams; ++b) {
      const SteeringVector& steer = s.beam_steer[b];
      for (int k = 0; k < K; ++k) {
        const Eigen::VectorXcd w = mpdr_weights(cov.matrix(k), steer.bin(k), sc.selector.loading);
        for (int c = 0; c <= num_sources; ++c)
          beam_comp[c][k] = w.dot(comp_frames[c].col(k));
      }
      // Weighted overlap-add straight into the per-component stems.
      const long start = static_cast<long>(l) * cfg.hop;
      const int r = channel_of[b];
      for (int c = 0; c <= num_sources; ++c) {
        fft.inverse(beam_comp[c], synth);
        std::vector<double>& dst =
            c < num_sources ? out.remote_stems[c][r] : out.remote_noise[r];
        const long limit = std::min<long>(cfg.frame_len, L - start);
        for (long i = 0; i < limit; ++i) dst[start + i] += synth[i] * window[i];
      }
    }
  }
}

}  // namespace

RenderedScene SceneRenderer::render(const ConcreteScene& scene) const {
  const Impl& s = *impl_;
  const Scenario& sc = s.scenario;
  const long L = s.num_samples;
  const int num_sources = static_cast<int>(scene.occupied_positions.size());
  const int num_mics = static_cast<int>(s.ha_mics.size());
  const bool beam_mode = sc.mode == SceneMode::table_beam_bank;
  const int num_channels = beam_mode ? static_cast<int>(sc.beam_bank.azimuths_deg.size())
                                     : num_sources;
  const bool noise_enabled = sc.snr_db < kNoiseFreeSnrDb;

  Rng rng(scene.combo_seed);

  RenderedScene out;
  out.sample_rate = s.fs;
  out.scene = scene;
  out.truth_channel = scene.truth_channel;

  // Dry stimuli, source order = occupied order (target first).
  out.source_dry.resize(num_sources);
  std::vector<double> own_dry(L, 0.0);
  if (sc.stimulus.conversation) {
    Rng conv_rng = rng.fork(10);
    auto conv = synth_conversation(*s.speech, sc.duration_s, scene.n_competing, conv_rng,
                                   sc.stimulus.conversation_params);
    out.source_dry[0] = std::move(conv.target);
    for (int i = 0; i < scene.n_competing; ++i) out.source_dry[i + 1] = std::move(conv.competing[i]);
    own_dry = std::move(conv.own_voice);
  } else {
    for (int si = 0; si < num_sources; ++si) {
      Rng talker_rng = rng.fork(10 + scene.occupied_positions[si]);
      out.source_dry[si] = s.speech->talker_stream(sc.duration_s, talker_rng);
    }
  }

  ConvolutionPlan plan(static_cast<int>(L + s.max_rir_len - 1));
  std::vector<std::vector<cdouble>> dry_spec(num_sources);
  for (int si = 0; si < num_sources; ++si) dry_spec[si] = plan.spectrum(out.source_dry[si]);

  // Stems at the HA microphones.
  out.ha_stems.assign(num_sources, std::vector<std::vector<double>>(
                                       num_mics, std::vector<double>(L, 0.0)));
  for (int si = 0; si < num_sources; ++si) {
    const int pos = scene.occupied_positions[si];
    for (int m = 0; m < num_mics; ++m) {
      const auto rir_spec = plan.spectrum(s.ha_rirs[pos][m]);
      plan.product(dry_spec[si], rir_spec, out.ha_stems[si][m]);
    }
  }

  // Isotropic SSN over all azimuth positions, at the HA (and table) mics.
  std::vector<std::vector<double>> iso;
  double noise_scale = 0.0;
  if (noise_enabled) {
    std::vector<std::vector<std::vector<double>>> iso_rirs = s.ha_rirs;
    if (beam_mode)
      for (size_t p = 0; p < iso_rirs.size(); ++p)
        iso_rirs[p].insert(iso_rirs[p].end(), s.table_rirs[p].begin(), s.table_rirs[p].end());
    Rng iso_rng = rng.fork(20);
    iso = isotropic_noise(iso_rirs, s.mag_template, sc.stft.fft_size, s.fs, sc.duration_s,
                          iso_rng);
    noise_scale = calibrate_snr(out.ha_stems[0][0], iso[0], sc.snr_db);
  }
  out.ha_noise.assign(num_mics, std::vector<double>(L, 0.0));
  if (noise_enabled)
    for (int m = 0; m < num_mics; ++m) out.ha_noise[m] = scaled(iso[m], noise_scale);
  const double ref_noise_energy = signal_energy(out.ha_noise[0]);

  // HA mixtures; the stem-sum identity holds by construction.
  out.ha_signals.assign(num_mics, std::vector<double>(L, 0.0));
  for (int m = 0; m < num_mics; ++m) {
    for (int si = 0; si < num_sources; ++si)
      for (long i = 0; i < L; ++i) out.ha_signals[m][i] += out.ha_stems[si][m][i];
    for (long i = 0; i < L; ++i) out.ha_signals[m][i] += out.ha_noise[m][i];
  }

  // Remote channels.
  out.remote_stems.assign(num_sources, std::vector<std::vector<double>>(
                                           num_channels, std::vector<double>(L, 0.0)));
  out.remote_noise.assign(num_channels, std::vector<double>(L, 0.0));

  if (!beam_mode) {
    for (int si = 0; si < num_sources; ++si) {
      const int pos = scene.occupied_positions[si];
      for (int r = 0; r < num_channels; ++r) {
        const int rm_pos = scene.occupied_positions[scene.channel_order[r]];
        const auto rir_spec = plan.spectrum(s.rm_rirs[pos][rm_pos]);
        plan.product(dry_spec[si], rir_spec, out.remote_stems[si][r]);
      }
    }
    // Independent SSN per RM at the energy of the HA-reference noise.
    if (noise_enabled) {
      for (int r = 0; r < num_channels; ++r) {
        Rng rm_rng = rng.fork(30 + r);
        auto ssn = synth_ssn(s.mag_template, sc.stft.fft_size, s.fs, sc.duration_s, rm_rng);
        const double e = signal_energy(ssn);
        out.remote_noise[r] = scaled(ssn, e > 0.0 ? std::sqrt(ref_noise_energy / e) : 0.0);
      }
    }
  } else {
    render_beams(s, out, scene, plan, dry_spec, iso, noise_scale);
  }

  out.remote_channels.assign(num_channels, std::vector<double>(L, 0.0));
  for (int r = 0; r < num_channels; ++r) {
    for (int si = 0; si < num_sources; ++si)
      for (long i = 0; i < L; ++i) out.remote_channels[r][i] += out.remote_stems[si][r][i];
    for (long i = 0; i < L; ++i) out.remote_channels[r][i] += out.remote_noise[r][i];
  }

  // Own voice reaches the reference mic through its own room path but is
  // kept out of the mixtures; it only feeds the oracle V_0.
  {
    const auto own_spec = plan.spectrum(own_dry);
    const auto rir_spec = plan.spectrum(s.own_rir_ref);
    out.own_voice.assign(L, 0.0);
    plan.product(own_spec, rir_spec, out.own_voice);
  }
  return out;
}

namespace {

uint64_t hash_channels(const std::vector<std::vector<double>>& channels) {
  uint64_t h = 1469598103934665603ULL;
  const auto mix = [&h](uint64_t v) {
    h ^= v;
    h *= 1099511628211ULL;
  };
  for (const auto& ch : channels)
    for (double x : ch) {
      uint64_t bits;
      std::memcpy(&bits, &x, sizeof(bits));
      mix(bits);
    }
  return h;
}

}  // namespace

void export_rendered_scene(const std::filesystem::path& dir, const RenderedScene& rendered,
                           const SceneRenderer& renderer, const Scenario& scenario) {
  std::filesystem::create_directories(dir);
  const double fs = rendered.sample_rate;

  write_wav(dir / "ha.wav", rendered.ha_signals, fs);
  write_wav(dir / "remotes.wav", rendered.remote_channels, fs);
  write_wav(dir / "own_voice.wav", {rendered.own_voice}, fs);
  for (int si = 0; si < rendered.num_sources(); ++si)
    write_wav(dir / ("stem_ha_src" + std::to_string(si) + ".wav"), rendered.ha_stems[si], fs);
  write_wav(dir / "noise_ha.wav", rendered.ha_noise, fs);
  write_steering_csv(dir / "steering.csv", renderer.steering_for_run());

  nlohmann::json truth{
      {"truth_channel", rendered.truth_channel},
      {"combo_seed", rendered.scene.combo_seed},
      {"n_competing", rendered.scene.n_competing},
      {"occupied_positions", rendered.scene.occupied_positions},
      {"channel_order", rendered.scene.channel_order},
      {"sample_rate", fs},
  };
  std::ofstream tf(dir / "truth.json");
  tf << truth.dump(2) << "\n";

  nlohmann::json manifest{
      {"snr_db", scenario.snr_db},
      {"duration_s", scenario.duration_s},
      {"mode", scenario.mode == SceneMode::table_beam_bank ? "table_beam_bank"
                                                           : "close_talking_rms"},
      {"hashes",
       {{"ha", hash_channels(rendered.ha_signals)},
        {"remotes", hash_channels(rendered.remote_channels)}}},
  };
  std::ofstream mf(dir / "render_manifest.json");
  mf << manifest.dump(2) << "\n";
}

}  // namespace chansel
