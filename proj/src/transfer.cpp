#include "chansel/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chansel/fft.hpp"
#include "chansel/rng.hpp"
#include "chansel/wav.hpp"

namespace chansel {

void SteeringVector::validate() const {
  if (d.rows() < 1 || d.cols() < 1) throw std::invalid_argument("SteeringVector: empty");
  if (reference_mic < 0 || reference_mic >= num_mics())
    throw std::invalid_argument("SteeringVector: reference mic out of range");
  for (int k = 0; k < num_bins(); ++k)
    if (d(reference_mic, k) != cdouble(1.0, 0.0))
      throw std::invalid_argument("SteeringVector: reference row not normalized at bin " +
                                  std::to_string(k));
}

Eigen::VectorXcd atf_of_rir(std::span<const double> rir, int fft_size) {
  RealFft fft(fft_size);
  std::vector<double> buf(fft_size, 0.0);
  const size_t n = std::min(rir.size(), static_cast<size_t>(fft_size));
  std::copy_n(rir.begin(), n, buf.begin());
  std::vector<cdouble> spec(fft.bins());
  fft.forward(buf, spec);
  return Eigen::Map<Eigen::VectorXcd>(spec.data(), static_cast<long>(spec.size()));
}

TransferFunctionSet atfs_from_rirs(std::vector<std::vector<std::vector<double>>> rirs,
                                   int fft_size) {
  if (rirs.empty() || rirs[0].empty())
    throw std::invalid_argument("atfs_from_rirs: need at least one source and mic");
  TransferFunctionSet out;
  const int num_mics = static_cast<int>(rirs[0].size());
  const int num_bins = fft_size / 2 + 1;
  out.atf.reserve(rirs.size());
  for (const auto& src : rirs) {
    if (static_cast<int>(src.size()) != num_mics)
      throw std::invalid_argument("atfs_from_rirs: ragged mic count");
    Eigen::MatrixXcd a(num_mics, num_bins);
    for (int m = 0; m < num_mics; ++m) a.row(m) = atf_of_rir(src[m], fft_size).transpose();
    out.atf.push_back(std::move(a));
  }
  out.impulse_responses = std::move(rirs);
  return out;
}

SteeringVector ratf_from_atf(const TransferFunctionSet& atfs, int source, int reference_mic) {
  if (source < 0 || source >= atfs.num_sources())
    throw std::invalid_argument("ratf_from_atf: source index out of range");
  if (reference_mic < 0 || reference_mic >= atfs.num_mics())
    throw std::invalid_argument("ratf_from_atf: reference mic out of range");

  const Eigen::MatrixXcd& a = atfs.atf[source];
  const double floor = 1e-12 * a.row(reference_mic).cwiseAbs().maxCoeff();

  SteeringVector d;
  d.reference_mic = reference_mic;
  d.d.resize(a.rows(), a.cols());
  for (int k = 0; k < a.cols(); ++k) {
    const cdouble ref = a(reference_mic, k);
    if (std::abs(ref) <= floor)
      throw NumericalError("ratf_from_atf: degenerate reference ATF at bin " + std::to_string(k));
    d.d.col(k) = a.col(k) / ref;
    d.d(reference_mic, k) = cdouble(1.0, 0.0);
  }
  return d;
}

SteeringVector perturb_steering(const SteeringVector& d, const SteeringPerturbation& mode) {
  if (mode.kind == SteeringPerturbation::Kind::substitute) {
    if (!mode.substitute) throw std::invalid_argument("perturb_steering: missing substitute");
    const SteeringVector& s = *mode.substitute;
    if (s.num_bins() != d.num_bins() || s.reference_mic != d.reference_mic)
      throw std::invalid_argument(
          "perturb_steering: substitute must share bin count and reference convention");
    s.validate();
    return s;
  }

  if (!mode.atfs || mode.source_azimuths_deg.size() != static_cast<size_t>(mode.atfs->num_sources()))
    throw std::invalid_argument("perturb_steering: rotate mode needs ATFs with azimuths");
  // Nearest available azimuth on the circle, wrap-around distance.
  int best = -1;
  double best_dist = 1e300;
  for (size_t i = 0; i < mode.source_azimuths_deg.size(); ++i) {
    double diff = std::fmod(std::abs(mode.source_azimuths_deg[i] - mode.rotate_deg), 360.0);
    diff = std::min(diff, 360.0 - diff);
    if (diff < best_dist) {
      best_dist = diff;
      best = static_cast<int>(i);
    }
  }
  if (best < 0)
    throw std::invalid_argument("perturb_steering: no transfer function near azimuth " +
                                std::to_string(mode.rotate_deg));
  return ratf_from_atf(*mode.atfs, best, d.reference_mic);
}

SteeringVector jitter_steering(const SteeringVector& d, double mag_std, double phase_std_rad,
                               uint64_t seed) {
  Rng rng(seed);
  SteeringVector out = d;
  for (int m = 0; m < d.num_mics(); ++m) {
    if (m == d.reference_mic) continue;
    for (int k = 0; k < d.num_bins(); ++k) {
      const double g = 1.0 + mag_std * rng.gaussian();
      const double ph = phase_std_rad * rng.gaussian();
      out.d(m, k) *= g * std::exp(cdouble(0.0, ph));
    }
  }
  return out;
}

IrSet load_ir_set(const std::filesystem::path& manifest_path, const StftConfig& cfg) {
  std::ifstream f(manifest_path);
  if (!f) throw SchemaError("cannot open IR manifest: " + manifest_path.string());
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("IR manifest parse error: " + std::string(e.what()));
  }
  if (!j.contains("entries") || !j["entries"].is_array())
    throw SchemaError("IR manifest: missing 'entries' array");

  const auto base = manifest_path.parent_path();
  struct Entry {
    std::string source_id, mic_id;
    std::filesystem::path wav;
    double azimuth = 0.0;
  };
  std::vector<Entry> entries;
  for (const auto& e : j["entries"]) {
    for (const char* key : {"source_id", "mic_id", "wav_path", "distance_m", "azimuth_deg"})
      if (!e.contains(key)) throw SchemaError(std::string("IR manifest entry missing '") + key + "'");
    entries.push_back({e["source_id"].get<std::string>(), e["mic_id"].get<std::string>(),
                       base / e["wav_path"].get<std::string>(), e["azimuth_deg"].get<double>()});
  }
  if (entries.empty()) throw SchemaError("IR manifest: no entries");

  std::vector<std::string> source_ids, mic_ids;
  for (const auto& e : entries) {
    if (std::find(source_ids.begin(), source_ids.end(), e.source_id) == source_ids.end())
      source_ids.push_back(e.source_id);
    if (std::find(mic_ids.begin(), mic_ids.end(), e.mic_id) == mic_ids.end())
      mic_ids.push_back(e.mic_id);
  }
  std::sort(mic_ids.begin(), mic_ids.end());
  std::sort(source_ids.begin(), source_ids.end());

  std::vector<std::vector<std::vector<double>>> rirs(
      source_ids.size(), std::vector<std::vector<double>>(mic_ids.size()));
  std::vector<double> azimuths(source_ids.size(), 0.0);
  for (const auto& e : entries) {
    const auto si = std::distance(source_ids.begin(),
                                  std::find(source_ids.begin(), source_ids.end(), e.source_id));
    const auto mi =
        std::distance(mic_ids.begin(), std::find(mic_ids.begin(), mic_ids.end(), e.mic_id));
    WavData wav = read_wav(e.wav);
    if (wav.num_channels() != 1)
      throw SchemaError("IR manifest: '" + e.wav.string() + "' is not mono");
    if (wav.sample_rate != cfg.sample_rate)
      throw SchemaError("IR manifest: sample rate mismatch in '" + e.wav.string() + "'");
    rirs[si][mi] = std::move(wav.channels[0]);
    azimuths[si] = e.azimuth;
  }
  for (size_t s = 0; s < rirs.size(); ++s)
    for (size_t m = 0; m < rirs[s].size(); ++m)
      if (rirs[s][m].empty())
        throw SchemaError("IR manifest: missing entry for source '" + source_ids[s] + "' mic '" +
                          mic_ids[m] + "'");

  IrSet out;
  out.transfers = atfs_from_rirs(std::move(rirs), cfg.fft_size);
  out.azimuths_deg = std::move(azimuths);
  out.source_ids = std::move(source_ids);
  return out;
}

void save_ir_set(const std::filesystem::path& manifest_path,
                 const std::vector<std::vector<std::vector<double>>>& rirs,
                 const std::vector<double>& azimuths_deg, const StftConfig& cfg) {
  const auto base = manifest_path.parent_path();
  nlohmann::json entries = nlohmann::json::array();
  for (size_t s = 0; s < rirs.size(); ++s) {
    for (size_t m = 0; m < rirs[s].size(); ++m) {
      char name[64];
      std::snprintf(name, sizeof(name), "ir_s%02zu_m%02zu.wav", s, m);
      write_wav(base / name, {rirs[s][m]}, cfg.sample_rate, WavFormat::float32);
      entries.push_back({{"source_id", "s" + std::to_string(s)},
                         {"mic_id", "m" + std::string(m < 10 ? "0" : "") + std::to_string(m)},
                         {"wav_path", std::string(name)},
                         {"distance_m", 0.0},
                         {"azimuth_deg", azimuths_deg.at(s)}});
    }
  }
  nlohmann::json j{{"sample_rate", cfg.sample_rate}, {"entries", entries}};
  std::ofstream f(manifest_path);
  if (!f) throw SchemaError("cannot write IR manifest: " + manifest_path.string());
  f << j.dump(2) << "\n";
}

void write_steering_csv(const std::filesystem::path& path, const SteeringVector& d) {
  std::ofstream f(path);
  if (!f) throw SchemaError("cannot write steering file: " + path.string());
  f << "bin";
  for (int m = 0; m < d.num_mics(); ++m) f << ",re_" << m << ",im_" << m;
  f << "\n";
  f.precision(17);
  for (int k = 0; k < d.num_bins(); ++k) {
    f << k;
    for (int m = 0; m < d.num_mics(); ++m)
      f << "," << d.d(m, k).real() << "," << d.d(m, k).imag();
    f << "\n";
  }
}

SteeringVector read_steering_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw SchemaError("cannot open steering file: " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw SchemaError("steering file empty: " + path.string());
  const int num_mics = static_cast<int>(std::count(line.begin(), line.end(), ',')) / 2;
  if (num_mics < 1) throw SchemaError("steering file header malformed: " + path.string());

  std::vector<std::vector<cdouble>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != 1 + 2 * num_mics)
      throw SchemaError("steering file row width mismatch: " + path.string());
    std::vector<cdouble> row(num_mics);
    for (int m = 0; m < num_mics; ++m) row[m] = cdouble(vals[1 + 2 * m], vals[2 + 2 * m]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw SchemaError("steering file has no bins: " + path.string());

  SteeringVector d;
  d.d.resize(num_mics, static_cast<long>(rows.size()));
  for (size_t k = 0; k < rows.size(); ++k)
    for (int m = 0; m < num_mics; ++m) d.d(m, static_cast<long>(k)) = rows[k][m];
  // Reference mic = the row that is identically one.
  d.reference_mic = -1;
  for (int m = 0; m < num_mics; ++m) {
    bool all_one = true;
    for (int k = 0; k < d.num_bins() && all_one; ++k)
      all_one = d.d(m, k) == cdouble(1.0, 0.0);
    if (all_one) {
      d.reference_mic = m;
      break;
    }
  }
  if (d.reference_mic < 0)
    throw SchemaError("steering file has no reference-normalized row: " + path.string());
  return d;
}

}  // namespace chansel
