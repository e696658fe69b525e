#pragma once

#include <span>
#include <vector>

#include "chansel/rng.hpp"
#include "chansel/transfer.hpp"

namespace chansel {

// Built-in long-term-average speech magnitude template, one value per bin
// of the given FFT size. Peak-normalized.
std::vector<double> ltass_template(int fft_size, double fs);

// Long-term magnitude spectrum of a speech corpus (Welch average), for use
// as an SSN template.
std::vector<double> template_from_corpus(const std::vector<std::vector<double>>& speech,
                                         int fft_size);

// Stationary Gaussian noise spectrally shaped to the template
// (one value per fft_size/2+1 bin, interpolated onto the synthesis grid).
// Output is unit-RMS.
std::vector<double> synth_ssn(std::span<const double> mag_template, int fft_size, double fs,
                              double duration_s, Rng& rng);

// Independent SSN per source position, convolved with each source->mic
// impulse response ([source][mic] -> taps) and summed per mic.
std::vector<std::vector<double>> isotropic_noise(
    const std::vector<std::vector<std::vector<double>>>& rirs,
    std::span<const double> mag_template, int fft_size, double fs, double duration_s, Rng& rng);

// Scale g for the noise so that 10*log10(|s|^2 / |g v|^2) hits the target.
double calibrate_snr(std::span<const double> target_at_ref, std::span<const double> noise_at_ref,
                     double target_snr_db);

}  // namespace chansel
