#include "chansel/vad.hpp"

#include <fstream>

#include "chansel/common.hpp"

namespace chansel {

double VadSequence::duty() const {
  if (values.empty()) return 0.0;
  long on = 0;
  for (uint8_t v : values) on += v;
  return static_cast<double>(on) / static_cast<double>(values.size());
}

VadSequence oracle_vad(std::span<const double> clean_signal, const StftConfig& cfg,
                       double threshold_db) {
  cfg.validate();
  const int num_frames = stft_num_frames(static_cast<long>(clean_signal.size()), cfg);
  VadSequence vad;
  vad.values.assign(std::max(num_frames, 0), 0);
  if (num_frames < 1) return vad;

  const double global_rms = signal_rms(clean_signal);
  if (global_rms == 0.0) return vad;
  const double threshold = global_rms * amplitude_ratio_from_db(threshold_db);

  for (int l = 0; l < num_frames; ++l) {
    const long start = static_cast<long>(l) * cfg.hop;
    const double rms = signal_rms(clean_signal.subspan(start, cfg.frame_len));
    vad.values[l] = rms > threshold ? 1 : 0;
  }
  return vad;
}

void write_vad_csv(const std::filesystem::path& path, const VadSequence& vad) {
  std::ofstream f(path);
  if (!f) throw SchemaError("cannot write VAD file: " + path.string());
  for (uint8_t v : vad.values) f << static_cast<int>(v) << "\n";
}

VadSequence read_vad_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw SchemaError("cannot open VAD file: " + path.string());
  VadSequence vad;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line != "0" && line != "1")
      throw SchemaError("VAD file must contain a single 0/1 column: " + path.string());
    vad.values.push_back(line == "1" ? 1 : 0);
  }
  return vad;
}

}  // namespace chansel
