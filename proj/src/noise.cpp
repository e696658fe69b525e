#include "chansel/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "chansel/fft.hpp"

namespace chansel {

std::vector<double> ltass_template(int fft_size, double fs) {
  // Flat through the speech formant region, low-frequency rolloff below
  // 120 Hz, about -9 dB/octave above 500 Hz.
  const int bins = fft_size / 2 + 1;
  std::vector<double> t(bins);
  for (int k = 0; k < bins; ++k) {
    const double f = k * fs / fft_size;
    double mag = 1.0;
    if (f < 120.0) {
      mag = f / 120.0;
    } else if (f > 500.0) {
      mag = std::pow(500.0 / f, 1.5);
    }
    t[k] = mag;
  }
  return t;
}

std::vector<double> template_from_corpus(const std::vector<std::vector<double>>& speech,
                                         int fft_size) {
  if (speech.empty()) throw std::invalid_argument("template_from_corpus: empty corpus");
  const int bins = fft_size / 2 + 1;
  std::vector<double> power(bins, 0.0);
  RealFft fft(fft_size);
  std::vector<double> frame(fft_size);
  std::vector<cdouble> spec(bins);
  const auto window = make_window(fft_size, WindowKind::sqrt_hann);
  long frames = 0;
  for (const auto& utt : speech) {
    for (long start = 0; start + fft_size <= static_cast<long>(utt.size()); start += fft_size / 2) {
      for (int i = 0; i < fft_size; ++i) frame[i] = utt[start + i] * window[i];
      fft.forward(frame, spec);
      for (int k = 0; k < bins; ++k) power[k] += std::norm(spec[k]);
      ++frames;
    }
  }
  if (frames == 0) throw std::invalid_argument("template_from_corpus: utterances shorter than FFT");
  double peak = 0.0;
  std::vector<double> mag(bins);
  for (int k = 0; k < bins; ++k) {
    mag[k] = std::sqrt(power[k] / frames);
    peak = std::max(peak, mag[k]);
  }
  if (peak <= 0.0) throw std::invalid_argument("template_from_corpus: silent corpus");
  for (double& m : mag) m /= peak;
  return mag;
}

std::vector<double> synth_ssn(std::span<const double> mag_template, int fft_size, double fs,
                              double duration_s, Rng& rng) {
  if (mag_template.size() != static_cast<size_t>(fft_size / 2 + 1))
    throw std::invalid_argument("synth_ssn: template size must be fft_size/2+1");
  if (duration_s <= 0.0) throw std::invalid_argument("synth_ssn: duration must be > 0");
  const long num_samples = static_cast<long>(std::llround(duration_s * fs));
  const int big = next_pow2(static_cast<int>(std::max<long>(num_samples, fft_size)));
  const int big_bins = big / 2 + 1;

  // Shape white complex spectrum by the template interpolated onto the
  // dense grid, then transform back.
  std::vector<cdouble> spec(big_bins);
  const double bin_hz_small = fs / fft_size;
  const double bin_hz_big = fs / big;
  for (int k = 0; k < big_bins; ++k) {
    const double f = k * bin_hz_big;
    const double pos = f / bin_hz_small;
    const int k0 = std::min(static_cast<int>(pos), fft_size / 2 - 1);
    const double frac = pos - k0;
    const double mag = mag_template[k0] * (1.0 - frac) + mag_template[k0 + 1] * frac;
    spec[k] = mag * rng.circular_gaussian();
  }
  spec[0] = cdouble(spec[0].real(), 0.0);
  spec[big_bins - 1] = cdouble(spec[big_bins - 1].real(), 0.0);

  RealFft fft(big);
  std::vector<double> x(big);
  fft.inverse(spec, x);
  x.resize(num_samples);

  const double rms = signal_rms(x);
  if (rms > 0.0)
    for (double& v : x) v /= rms;
  return x;
}

std::vector<std::vector<double>> isotropic_noise(
    const std::vector<std::vector<std::vector<double>>>& rirs,
    std::span<const double> mag_template, int fft_size, double fs, double duration_s, Rng& rng) {
  if (rirs.empty() || rirs[0].empty())
    throw std::invalid_argument("isotropic_noise: empty transfer set");
  const int num_mics = static_cast<int>(rirs[0].size());
  const long num_samples = static_cast<long>(std::llround(duration_s * fs));

  long max_rir = 0;
  for (const auto& src : rirs) {
    if (static_cast<int>(src.size()) != num_mics)
      throw std::invalid_argument("isotropic_noise: ragged mic count");
    for (const auto& ir : src) {
      if (ir.empty()) throw std::invalid_argument("isotropic_noise: missing impulse response");
      max_rir = std::max(max_rir, static_cast<long>(ir.size()));
    }
  }

  ConvolutionPlan plan(static_cast<int>(num_samples + max_rir - 1));
  std::vector<std::vector<double>> mics(num_mics, std::vector<double>(num_samples, 0.0));
  for (size_t s = 0; s < rirs.size(); ++s) {
    Rng src_rng = rng.fork(s);
    const auto ssn = synth_ssn(mag_template, fft_size, fs, duration_s, src_rng);
    const auto src_spec = plan.spectrum(ssn);
    for (int m = 0; m < num_mics; ++m) {
      const auto rir_spec = plan.spectrum(rirs[s][m]);
      plan.accumulate_product(src_spec, rir_spec, mics[m]);
    }
  }
  return mics;
}

double calibrate_snr(std::span<const double> target_at_ref, std::span<const double> noise_at_ref,
                     double target_snr_db) {
  const double es = signal_energy(target_at_ref);
  const double en = signal_energy(noise_at_ref);
  if (es <= 0.0 || en <= 0.0)
    throw std::invalid_argument("calibrate_snr: zero-energy input");
  return std::sqrt(es / (en * power_ratio_from_db(target_snr_db)));
}

}  // namespace chansel
