#include "chansel/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace chansel {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw SchemaError("scenario: unknown field '" + context + it.key() + "'");
}

Vec3 parse_vec3(const json& j, const std::string& context) {
  if (!j.is_array() || j.size() != 3)
    throw SchemaError("scenario: '" + context + "' must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
void get_if(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj[key].template get<T>();
}

}  // namespace

void Scenario::validate() const {
  if (schema_version != 1)
    throw SchemaError("scenario: unsupported schema_version " + std::to_string(schema_version));
  if (duration_s <= 1.0) throw SchemaError("scenario: duration_s must exceed 1 s");
  room.validate();
  stft.validate();
  if (geometry.num_azimuths < 2) throw SchemaError("scenario: need at least 2 azimuth positions");
  if (geometry.circle_radius_m <= geometry.rm_offset_m)
    throw SchemaError("scenario: RM offset must be smaller than the circle radius");
  for (int n : sweep.n_values)
    if (n < 1 || n > max_competing())
      throw SchemaError("scenario: N=" + std::to_string(n) + " outside 1.." +
                        std::to_string(max_competing()) + " (limited by " +
                        std::to_string(geometry.num_azimuths) + " positions, one for the target)");
  for (double t : sweep.t_int_values)
    if (t <= 0.0) throw SchemaError("scenario: integration times must be > 0");
  if (sweep.num_combos < 1) throw SchemaError("scenario: num_combos must be >= 1");
  if (selector.alpha_y < 0.0 || selector.alpha_y >= 1.0)
    throw SchemaError("scenario: alpha_y must be in [0,1)");
  static const std::set<std::string> known_methods{"proposed", "optimal", "ncc", "mog", "random"};
  for (const auto& m : sweep.methods)
    if (!known_methods.count(m)) throw SchemaError("scenario: unknown method '" + m + "'");
  if (sweep.methods.empty()) throw SchemaError("scenario: no methods enabled");
  if (mode == SceneMode::table_beam_bank) {
    if (beam_bank.azimuths_deg.size() < 2)
      throw SchemaError("scenario: beam bank needs at least 2 steer targets");
    if (beam_bank.table_num_mics < 2) throw SchemaError("scenario: table array needs >= 2 mics");
    const bool has_frontal = std::any_of(beam_bank.azimuths_deg.begin(),
                                         beam_bank.azimuths_deg.end(),
                                         [](double a) { return a == 0.0; });
    if (!has_frontal) throw SchemaError("scenario: beam bank must include the 0 deg target beam");
  }
  if (stimulus.kind == StimulusSpec::Kind::corpus && !stimulus.corpus_manifest)
    throw SchemaError("scenario: stimulus.kind 'corpus' requires 'corpus_manifest'");
  if (steering.mode == SteeringSpec::Mode::file && !steering.file)
    throw SchemaError("scenario: steering.mode 'file' requires 'file'");
}

Scenario Scenario::from_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw SchemaError("cannot open scenario file: " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return from_json_text(ss.str(), path.parent_path());
}

Scenario Scenario::from_json_text(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw SchemaError("scenario parse error: " + std::string(e.what()));
  }
  if (!j.is_object()) throw SchemaError("scenario: top level must be an object");

  Scenario s;
  s.base_dir = base_dir;

  reject_unknown_keys(j,
                      {"schema_version", "duration_s", "snr_db", "mode", "room", "stft",
                       "geometry", "stimulus", "steering", "selector", "beam_bank", "sweep"},
                      "");
  if (!j.contains("schema_version"))
    throw SchemaError("scenario: missing required field 'schema_version'");
  s.schema_version = j["schema_version"].get<int>();
  get_if(j, "duration_s", s.duration_s);
  get_if(j, "snr_db", s.snr_db);

  if (j.contains("mode")) {
    const auto m = j["mode"].get<std::string>();
    if (m == "close_talking_rms")
      s.mode = SceneMode::close_talking_rms;
    else if (m == "table_beam_bank")
      s.mode = SceneMode::table_beam_bank;
    else
      throw SchemaError("scenario: unknown mode '" + m + "'");
  }

  if (j.contains("room")) {
    const auto& r = j["room"];
    reject_unknown_keys(r, {"dims", "t60", "wall_absorption", "max_image_order", "speed_of_sound"},
                        "room.");
    if (r.contains("dims")) s.room.dims = parse_vec3(r["dims"], "room.dims");
    get_if(r, "t60", s.room.t60);
    get_if(r, "max_image_order", s.room.max_image_order);
    get_if(r, "speed_of_sound", s.room.speed_of_sound);
    if (r.contains("wall_absorption")) {
      const auto& w = r["wall_absorption"];
      if (!w.is_array() || w.size() != 6)
        throw SchemaError("scenario: 'room.wall_absorption' must have 6 entries");
      std::array<double, 6> a{};
      for (int i = 0; i < 6; ++i) a[i] = w[i].get<double>();
      s.room.wall_absorption = a;
    }
  }

  if (j.contains("stft")) {
    const auto& t = j["stft"];
    reject_unknown_keys(t, {"sample_rate", "frame_len", "hop", "fft_size"}, "stft.");
    get_if(t, "sample_rate", s.stft.sample_rate);
    get_if(t, "frame_len", s.stft.frame_len);
    get_if(t, "hop", s.stft.hop);
    get_if(t, "fft_size", s.stft.fft_size);
  }

  if (j.contains("geometry")) {
    const auto& g = j["geometry"];
    reject_unknown_keys(g,
                        {"ha_position", "circle_radius_m", "num_azimuths", "talker_height_m",
                         "rm_offset_m", "own_voice_offset_m", "ha_ir_manifest"},
                        "geometry.");
    if (g.contains("ha_position")) s.geometry.ha_position = parse_vec3(g["ha_position"], "geometry.ha_position");
    get_if(g, "circle_radius_m", s.geometry.circle_radius_m);
    get_if(g, "num_azimuths", s.geometry.num_azimuths);
    get_if(g, "talker_height_m", s.geometry.talker_height_m);
    get_if(g, "rm_offset_m", s.geometry.rm_offset_m);
    get_if(g, "own_voice_offset_m", s.geometry.own_voice_offset_m);
    if (g.contains("ha_ir_manifest") && !g["ha_ir_manifest"].is_null())
      s.geometry.ha_ir_manifest = base_dir / g["ha_ir_manifest"].get<std::string>();
  }

  if (j.contains("stimulus")) {
    const auto& st = j["stimulus"];
    reject_unknown_keys(st,
                        {"kind", "conversation", "corpus_manifest", "mean_turn_s", "gap_s",
                         "overlap_prob"},
                        "stimulus.");
    if (st.contains("kind")) {
      const auto k = st["kind"].get<std::string>();
      if (k == "synthetic")
        s.stimulus.kind = StimulusSpec::Kind::synthetic;
      else if (k == "corpus")
        s.stimulus.kind = StimulusSpec::Kind::corpus;
      else
        throw SchemaError("scenario: unknown stimulus kind '" + k + "'");
    }
    get_if(st, "conversation", s.stimulus.conversation);
    if (st.contains("corpus_manifest") && !st["corpus_manifest"].is_null())
      s.stimulus.corpus_manifest = base_dir / st["corpus_manifest"].get<std::string>();
    get_if(st, "mean_turn_s", s.stimulus.conversation_params.mean_turn_s);
    get_if(st, "gap_s", s.stimulus.conversation_params.gap_s);
    get_if(st, "overlap_prob", s.stimulus.conversation_params.overlap_prob);
  }

  if (j.contains("steering")) {
    const auto& st = j["steering"];
    reject_unknown_keys(
        st, {"mode", "rotate_deg", "jitter_mag", "jitter_phase_rad", "jitter_seed", "file"},
        "steering.");
    if (st.contains("mode")) {
      const auto m = st["mode"].get<std::string>();
      if (m == "matched")
        s.steering.mode = SteeringSpec::Mode::matched;
      else if (m == "rotate")
        s.steering.mode = SteeringSpec::Mode::rotate;
      else if (m == "jitter")
        s.steering.mode = SteeringSpec::Mode::jitter;
      else if (m == "file")
        s.steering.mode = SteeringSpec::Mode::file;
      else
        throw SchemaError("scenario: unknown steering mode '" + m + "'");
    }
    get_if(st, "rotate_deg", s.steering.rotate_deg);
    get_if(st, "jitter_mag", s.steering.jitter_mag);
    get_if(st, "jitter_phase_rad", s.steering.jitter_phase_rad);
    get_if(st, "jitter_seed", s.steering.jitter_seed);
    if (st.contains("file") && !st["file"].is_null())
      s.steering.file = base_dir / st["file"].get<std::string>();
  }

  if (j.contains("selector")) {
    const auto& sel = j["selector"];
    reject_unknown_keys(sel, {"alpha_y", "loading", "weighting", "ncc_lag_range_s"}, "selector.");
    get_if(sel, "alpha_y", s.selector.alpha_y);
    get_if(sel, "loading", s.selector.loading);
    get_if(sel, "ncc_lag_range_s", s.selector.ncc_lag_range_s);
    if (sel.contains("weighting")) {
      const auto w = sel["weighting"].get<std::string>();
      if (w == "approximation")
        s.selector.weighting = SelectorConfig::Weighting::approximation;
      else if (w == "oracle")
        s.selector.weighting = SelectorConfig::Weighting::oracle;
      else
        throw SchemaError("scenario: unknown weighting '" + w + "'");
    }
  }

  if (j.contains("beam_bank")) {
    const auto& b = j["beam_bank"];
    reject_unknown_keys(b, {"azimuths_deg", "table_center", "table_radius_m", "table_num_mics"},
                        "beam_bank.");
    if (b.contains("azimuths_deg"))
      s.beam_bank.azimuths_deg = b["azimuths_deg"].get<std::vector<double>>();
    if (b.contains("table_center"))
      s.beam_bank.table_center = parse_vec3(b["table_center"], "beam_bank.table_center");
    get_if(b, "table_radius_m", s.beam_bank.table_radius_m);
    get_if(b, "table_num_mics", s.beam_bank.table_num_mics);
  }

  if (j.contains("sweep")) {
    const auto& sw = j["sweep"];
    reject_unknown_keys(sw, {"n_values", "t_int_values", "num_combos", "master_seed", "methods"},
                        "sweep.");
    if (sw.contains("n_values")) s.sweep.n_values = sw["n_values"].get<std::vector<int>>();
    if (sw.contains("t_int_values"))
      s.sweep.t_int_values = sw["t_int_values"].get<std::vector<double>>();
    get_if(sw, "num_combos", s.sweep.num_combos);
    get_if(sw, "master_seed", s.sweep.master_seed);
    if (sw.contains("methods")) s.sweep.methods = sw["methods"].get<std::vector<std::string>>();
  }

  s.validate();
  return s;
}

void Scenario::apply_paper_scale() {
  sweep.n_values = {2, 3, 4, 5, 6, 7, 8};
  sweep.t_int_values = {0.5, 1.0, 2.0, 5.0, 15.0};
  sweep.num_combos = 40;
}

uint64_t hash_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw SchemaError("cannot hash file: " + path.string());
  uint64_t h = 1469598103934665603ULL;
  char c;
  while (f.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace chansel
