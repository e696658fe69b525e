// chansel - head-steered remote channel selection: scene simulation,
// selection pipeline, baselines, and experiment sweeps.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "chansel/harness.hpp"
#include "chansel/rir.hpp"
#include "chansel/wav.hpp"

namespace fs = std::filesystem;
using namespace chansel;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

// flag > environment > scenario file.
template <typename T>
void apply_env(const char* name, std::optional<T>& slot) {
  if (slot) return;  // flag already set
  const char* v = std::getenv(name);
  if (!v) return;
  if constexpr (std::is_same_v<T, uint64_t>) {
    slot = static_cast<uint64_t>(std::stoull(v));
  } else if constexpr (std::is_same_v<T, int>) {
    slot = std::stoi(v);
  } else if constexpr (std::is_same_v<T, double>) {
    slot = std::stod(v);
  } else {
    slot = std::string(v);
  }
}

struct RirArgs {
  std::vector<double> room{6.0, 5.0, 3.0};
  double t60 = 0.0;
  std::vector<double> src;
  std::vector<double> mic;
  double fs = 16000.0;
  std::string out;
};

int cmd_rir(const RirArgs& a) {
  RoomSpec room;
  room.dims = {a.room[0], a.room[1], a.room[2]};
  room.t60 = a.t60;
  const Vec3 src{a.src[0], a.src[1], a.src[2]};
  const Vec3 mic{a.mic[0], a.mic[1], a.mic[2]};
  const auto h = image_rir(room, src, mic, a.fs);
  write_wav(a.out, {h}, a.fs);

  const double dist = distance(src, mic);
  std::cout << "direct_path_delay_s=" << dist / room.speed_of_sound
            << " direct_path_delay_samples=" << dist / room.speed_of_sound * a.fs << "\n";
  std::cout << "estimated_t60_s=" << schroeder_t60(h, a.fs) << "\n";
  std::cout << "wrote " << a.out << " (" << h.size() << " taps)\n";
  return kExitOk;
}

struct RenderArgs {
  std::string scenario;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::optional<int> n;
  int combo = 0;
  bool snr = false;
};

int cmd_render(const RenderArgs& a) {
  Scenario sc = Scenario::from_file(a.scenario);
  const uint64_t master = a.seed.value_or(sc.sweep.master_seed);
  const int n = a.n.value_or(sc.sweep.n_values.front());

  SceneRenderer renderer(sc);
  const auto scene = build_scene(sc, n, combo_seed_for(master, n, a.combo));
  const auto rendered = renderer.render(scene);
  export_rendered_scene(a.out_dir, rendered, renderer, sc);

  if (a.snr) {
    PipelineConfig cfg;
    cfg.stft = sc.stft;
    cfg.alpha_y = sc.selector.alpha_y;
    cfg.loading = sc.selector.loading;
    const auto report = snr_report(rendered, renderer.steering_for_run(), cfg);
    std::ofstream f(fs::path(a.out_dir) / "snr_report.csv");
    report.write_csv(f);
    report.write_csv(std::cout);
  }
  std::cout << "rendered scene: N=" << n << " R=" << rendered.num_channels()
            << " truth_channel=" << rendered.truth_channel << " -> " << a.out_dir << "\n";
  return kExitOk;
}

struct SelectArgs {
  std::string ha;
  std::vector<std::string> remotes;
  std::string steering;
  std::optional<double> t_int;
  std::string out;
  std::string truth;
  std::string noise;
  std::string dump_weights;
};

int cmd_select(const SelectArgs& a) {
  const WavData ha = read_wav(a.ha);
  PipelineConfig cfg;
  if (ha.sample_rate != cfg.stft.sample_rate)
    throw SchemaError("HA WAV sample rate " + std::to_string(ha.sample_rate) +
                      " does not match the 16 kHz processing rate (no resampling)");

  std::vector<std::vector<double>> remotes;
  for (const auto& path : a.remotes) {
    WavData wav = read_wav(path);
    if (wav.sample_rate != cfg.stft.sample_rate)
      throw SchemaError("remote WAV sample rate mismatch: " + path);
    if (a.remotes.size() > 1 && wav.num_channels() != 1)
      throw SchemaError("with multiple remote files each must be mono: " + path);
    for (auto& ch : wav.channels) remotes.push_back(std::move(ch));
  }
  if (remotes.empty()) throw SchemaError("no remote channels given");

  const SteeringVector steering = read_steering_csv(a.steering);
  std::optional<double> t_int = a.t_int;
  apply_env("CHANSEL_T_INT", t_int);
  cfg.integration_time_s = t_int.value_or(2.0);

  std::vector<std::vector<double>> noise;
  const std::vector<std::vector<double>>* noise_ptr = nullptr;
  if (!a.noise.empty()) {
    WavData wav = read_wav(a.noise);
    if (wav.sample_rate != cfg.stft.sample_rate)
      throw SchemaError("noise WAV sample rate mismatch: " + a.noise);
    noise = std::move(wav.channels);
    noise_ptr = &noise;
    cfg.weighting = SelectorConfig::Weighting::oracle;
  }

  std::vector<Eigen::MatrixXcd> weights;
  const SelectionRun run =
      run_selection(ha.channels, remotes, steering, cfg, noise_ptr,
                    a.dump_weights.empty() ? nullptr : &weights);
  write_decision_log(a.out, run);
  if (!a.dump_weights.empty()) write_weights_csv(a.dump_weights, weights);

  const auto decisions = run.decision_channels();
  const auto psr = compute_psr(decisions, static_cast<int>(remotes.size()));
  const int modal = static_cast<int>(std::max_element(psr.begin(), psr.end()) - psr.begin());
  std::cout << "decisions=" << decisions.size() << " modal_channel=" << modal;
  if (!a.truth.empty()) {
    std::ifstream tf(a.truth);
    if (!tf) throw SchemaError("cannot open truth sidecar: " + a.truth);
    nlohmann::json j;
    tf >> j;
    const int truth = j.at("truth_channel").get<int>();
    std::cout << " truth_channel=" << truth << " p_c=" << compute_pc(decisions, truth);
  }
  std::cout << "\n";
  return kExitOk;
}

struct ExperimentArgs {
  std::string scenario;
  std::string out = "results.csv";
  std::optional<uint64_t> seed;
  std::optional<std::string> t_ints;
  std::optional<std::string> methods;
  std::optional<int> workers;
  bool paper_scale = false;
  std::string decision_logs;
};

int cmd_experiment(const ExperimentArgs& a) {
  Scenario sc = Scenario::from_file(a.scenario);

  ExperimentArgs args = a;
  apply_env("CHANSEL_SEED", args.seed);
  apply_env("CHANSEL_T_INT", args.t_ints);
  apply_env("CHANSEL_METHODS", args.methods);
  apply_env("CHANSEL_WORKERS", args.workers);
  if (!args.paper_scale && std::getenv("CHANSEL_PAPER_SCALE")) args.paper_scale = true;

  RunOptions options;
  options.workers = args.workers.value_or(1);
  options.paper_scale = args.paper_scale;
  options.seed_override = args.seed;
  if (args.methods) options.methods_override = split_csv_list(*args.methods);
  if (args.t_ints) {
    std::vector<double> ts;
    for (const auto& s : split_csv_list(*args.t_ints)) ts.push_back(std::stod(s));
    options.t_int_override = ts;
  }
  if (!args.decision_logs.empty()) {
    fs::create_directories(args.decision_logs);
    options.decision_log_dir = fs::path(args.decision_logs);
  }

  const ExperimentResult result = run_sweep(sc, options);
  result.write_csv(fs::path(args.out));

  Scenario effective = sc;
  if (options.paper_scale) effective.apply_paper_scale();
  if (options.methods_override) effective.sweep.methods = *options.methods_override;
  if (options.t_int_override) effective.sweep.t_int_values = *options.t_int_override;
  const uint64_t master = args.seed.value_or(sc.sweep.master_seed);
  write_run_manifest(fs::path(args.out).replace_extension(".manifest.json"), effective,
                     fs::path(a.scenario), master);

  std::cout << "wrote " << args.out << " (" << result.rows.size() << " rows, "
            << result.aggregates.size() << " aggregates)\n";
  return kExitOk;
}

int cmd_validate(const std::string& path) {
  Scenario::from_file(path);
  std::cout << "scenario ok: " << path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"head-steered remote channel selection for multichannel audio scenes"};
  app.require_subcommand(1);

  RirArgs rir_args;
  auto* rir_cmd = app.add_subcommand("rir", "generate an image-method room impulse response");
  rir_cmd->add_option("--room", rir_args.room, "room dimensions x y z [m]")->expected(3);
  rir_cmd->add_option("--t60", rir_args.t60, "target reverberation time [s], 0 = anechoic");
  rir_cmd->add_option("--src", rir_args.src, "source position x y z [m]")->expected(3)->required();
  rir_cmd->add_option("--mic", rir_args.mic, "microphone position x y z [m]")->expected(3)->required();
  rir_cmd->add_option("--fs", rir_args.fs, "sample rate [Hz]");
  rir_cmd->add_option("-o,--out", rir_args.out, "output WAV path")->required();

  RenderArgs render_args;
  auto* render_cmd = app.add_subcommand("render", "render one acoustic scene to WAV files");
  render_cmd->add_option("scenario", render_args.scenario, "scenario JSON file")->required();
  render_cmd->add_option("-o,--out-dir", render_args.out_dir, "output directory")->required();
  render_cmd->add_option("--seed", render_args.seed, "master seed override");
  render_cmd->add_option("--n", render_args.n, "number of competing talkers");
  render_cmd->add_option("--combo", render_args.combo, "combo index");
  render_cmd->add_flag("--snr-report", render_args.snr, "also write an SNR report");

  SelectArgs select_args;
  auto* select_cmd = app.add_subcommand("select", "run channel selection on audio files");
  select_cmd->add_option("--ha", select_args.ha, "multichannel HA WAV")->required();
  select_cmd->add_option("--remotes", select_args.remotes,
                         "remote channel WAVs (one multichannel or several mono)")
      ->required()
      ->expected(-1);
  select_cmd->add_option("--steering", select_args.steering, "steering CSV")->required();
  select_cmd->add_option("--t-int", select_args.t_int, "integration time [s]");
  select_cmd->add_option("-o,--out", select_args.out, "decision log CSV")->required();
  select_cmd->add_option("--truth", select_args.truth, "truth sidecar JSON (prints P_C)");
  select_cmd->add_option("--noise", select_args.noise,
                         "isolated HA noise WAV (enables oracle weighting)");
  select_cmd->add_option("--dump-weights", select_args.dump_weights,
                         "write final per-bin MPDR weights CSV");

  ExperimentArgs exp_args;
  auto* exp_cmd = app.add_subcommand("experiment", "run a seeded (N, T_int, combo) sweep");
  exp_cmd->add_option("scenario", exp_args.scenario, "scenario JSON file")->required();
  exp_cmd->add_option("-o,--out", exp_args.out, "results CSV path");
  exp_cmd->add_option("--seed", exp_args.seed, "master seed override");
  exp_cmd->add_option("--t-int", exp_args.t_ints, "integration times, comma-separated [s]");
  exp_cmd->add_option("--methods", exp_args.methods,
                      "methods subset: proposed,optimal,ncc,mog,random");
  exp_cmd->add_option("--workers", exp_args.workers, "parallel combo workers");
  exp_cmd->add_flag("--paper-scale", exp_args.paper_scale,
                    "full grid: N=2..8, five integration times, 40 combos");
  exp_cmd->add_option("--decision-logs", exp_args.decision_logs,
                      "directory for per-frame decision logs");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "schema-check a scenario file");
  validate_cmd->add_option("scenario", validate_path, "scenario JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (rir_cmd->parsed()) return cmd_rir(rir_args);
    if (render_cmd->parsed()) return cmd_render(render_args);
    if (select_cmd->parsed()) return cmd_select(select_args);
    if (exp_cmd->parsed()) return cmd_experiment(exp_args);
    if (validate_cmd->parsed()) return cmd_validate(validate_path);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
