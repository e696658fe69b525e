#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <vector>

#include "chansel/common.hpp"
#include "chansel/stft.hpp"

namespace chansel {

// Relative transfer function d(theta, k): M x K, reference row identically 1.
struct SteeringVector {
  Eigen::MatrixXcd d;  // mics x bins
  int reference_mic = 0;

  int num_mics() const { return static_cast<int>(d.rows()); }
  int num_bins() const { return static_cast<int>(d.cols()); }
  Eigen::VectorXcd bin(int k) const { return d.col(k); }
  void validate() const;
};

// ATFs per (source, mic, bin) together with the impulse responses they are
// derived from.
struct TransferFunctionSet {
  std::vector<Eigen::MatrixXcd> atf;                          // [source] -> mics x bins
  std::vector<std::vector<std::vector<double>>> impulse_responses;  // [source][mic] -> taps

  int num_sources() const { return static_cast<int>(atf.size()); }
  int num_mics() const { return atf.empty() ? 0 : static_cast<int>(atf[0].rows()); }
  int num_bins() const { return atf.empty() ? 0 : static_cast<int>(atf[0].cols()); }
};

// ATF = DFT of the impulse response truncated/zero-padded to fft_size
// (multiplicative transfer function convention).
TransferFunctionSet atfs_from_rirs(std::vector<std::vector<std::vector<double>>> rirs,
                                   int fft_size);

Eigen::VectorXcd atf_of_rir(std::span<const double> rir, int fft_size);

SteeringVector ratf_from_atf(const TransferFunctionSet& atfs, int source, int reference_mic);

struct SteeringPerturbation {
  enum class Kind { substitute, rotate };
  Kind kind = Kind::substitute;

  // substitute: the steering vector the selector will use instead.
  std::optional<SteeringVector> substitute;

  // rotate: swap in the RATF of the source nearest the rotated azimuth.
  const TransferFunctionSet* atfs = nullptr;
  std::vector<double> source_azimuths_deg;
  double rotate_deg = 0.0;
};

// Returns the steering vector the selector will (mis)use; scene truth is
// untouched by construction.
SteeringVector perturb_steering(const SteeringVector& d, const SteeringPerturbation& mode);

// Random per-bin magnitude/phase jitter on the non-reference rows.
SteeringVector jitter_steering(const SteeringVector& d, double mag_std, double phase_std_rad,
                               uint64_t seed);

// Documented IR-set import: a JSON manifest listing
// {source_id, mic_id, wav_path, distance_m, azimuth_deg} entries with mono
// impulse-response WAVs at the config sample rate.
struct IrSet {
  TransferFunctionSet transfers;
  std::vector<double> azimuths_deg;       // per source
  std::vector<std::string> source_ids;
};
IrSet load_ir_set(const std::filesystem::path& manifest_path, const StftConfig& cfg);
void save_ir_set(const std::filesystem::path& manifest_path,
                 const std::vector<std::vector<std::vector<double>>>& rirs,
                 const std::vector<double>& azimuths_deg, const StftConfig& cfg);

// CSV steering-vector exchange format: header then one row per bin with
// re/im per mic.
void write_steering_csv(const std::filesystem::path& path, const SteeringVector& d);
SteeringVector read_steering_csv(const std::filesystem::path& path);

}  // namespace chansel
