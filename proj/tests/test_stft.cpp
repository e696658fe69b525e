#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "chansel/fft.hpp"
#include "chansel/rng.hpp"
#include "chansel/stft.hpp"
#include "chansel/wav.hpp"

using namespace chansel;

TEST_CASE("sqrt-hann window matches the closed form") {
  const auto w = make_window(512, WindowKind::sqrt_hann);
  REQUIRE(w.size() == 512);
  for (int n = 0; n < 512; ++n) {
    const double expected = std::sqrt(0.5 - 0.5 * std::cos(2.0 * kPi * n / 512.0));
    CHECK(w[n] == doctest::Approx(expected).epsilon(1e-14));
    CHECK(w[n] >= 0.0);
    CHECK(w[n] <= 1.0);
  }
}

TEST_CASE("length-2 window is the periodic Hann endpoint case") {
  const auto w = make_window(2, WindowKind::sqrt_hann);
  CHECK(w[0] == doctest::Approx(0.0));
  CHECK(w[1] == doctest::Approx(1.0));
}

TEST_CASE("odd or zero window length is rejected") {
  CHECK_THROWS_AS(make_window(511, WindowKind::sqrt_hann), std::invalid_argument);
  CHECK_THROWS_AS(make_window(0, WindowKind::sqrt_hann), std::invalid_argument);
}

TEST_CASE("COLA: squared windows at 50% overlap sum to one") {
  // Direct summation over shifted windows in steady state.
  const int len = 512, hop = 256;
  const auto w = make_window(len, WindowKind::sqrt_hann);
  for (int n = 0; n < hop; ++n) {
    const double sum = w[n] * w[n] + w[n + hop] * w[n + hop];
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("all-zero input analyzes to an all-zero block") {
  StftConfig cfg;
  const std::vector<std::vector<double>> x(2, std::vector<double>(4096, 0.0));
  const auto block = stft_analyze(x, cfg);
  for (int l = 0; l < block.num_frames(); ++l)
    for (int k = 0; k < block.num_bins(); ++k)
      for (int c = 0; c < 2; ++c) CHECK(std::abs(block.at(l, k, c)) == 0.0);
}

TEST_CASE("integer-bin sine concentrates at its bin") {
  StftConfig cfg;
  const double f = 1000.0;  // 1000 * 512 / 16000 = bin 32 exactly
  std::vector<double> x(16000);
  for (size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2.0 * kPi * f * i / cfg.sample_rate);
  const auto block = stft_analyze({x}, cfg);

  for (int l = 1; l < block.num_frames() - 1; ++l) {
    double total = 0.0, at_peak = 0.0;
    for (int k = 0; k < block.num_bins(); ++k) {
      const double p = std::norm(block.at(l, k, 0));
      total += p;
      if (k == 32) at_peak = p;
    }
    // sqrt-hann is not leakage-free even at integer bins; the peak and its
    // immediate neighbours carry essentially all energy.
    const double neighborhood = at_peak + std::norm(block.at(l, 31, 0)) +
                                std::norm(block.at(l, 33, 0));
    CHECK(neighborhood / total > 0.999);
    const int argmax = [&] {
      int best = 0;
      for (int k = 1; k < block.num_bins(); ++k)
        if (std::norm(block.at(l, k, 0)) > std::norm(block.at(l, best, 0))) best = k;
      return best;
    }();
    CHECK(argmax == 32);
  }
}

TEST_CASE("impulse transforms to a flat spectrum scaled by the window sample") {
  StftConfig cfg;
  std::vector<double> x(2048, 0.0);
  const int n0 = 100;
  x[n0] = 1.0;
  const auto w = make_window(cfg.frame_len, cfg.window);
  const auto block = stft_analyze({x}, cfg);
  for (int k = 0; k < block.num_bins(); ++k)
    CHECK(std::abs(block.at(0, k, 0)) == doctest::Approx(w[n0]).epsilon(1e-12));
}

TEST_CASE("signal shorter than one frame is rejected") {
  StftConfig cfg;
  CHECK_THROWS_AS(stft_analyze({std::vector<double>(100, 1.0)}, cfg), std::invalid_argument);
}

TEST_CASE("round trip reconstructs 30 s of noise above 60 dB") {
  StftConfig cfg;
  Rng rng(7);
  std::vector<double> x(static_cast<size_t>(30 * 16000));
  for (auto& v : x) v = rng.gaussian();

  const auto block = stft_analyze({x}, cfg);
  const auto y = stft_synthesize(block);

  double err = 0.0, ref = 0.0;
  for (size_t i = cfg.frame_len; i + cfg.frame_len < x.size() && i < y[0].size(); ++i) {
    const double e = x[i] - y[0][i];
    err += e * e;
    ref += x[i] * x[i];
  }
  const double snr_db = db_from_power_ratio(ref / err);
  CHECK(snr_db >= 60.0);
  CHECK(err / ref <= 1e-6 * 1e-6 * 1e6);  // relative L2 <= 1e-6 on the steady region
  CHECK(std::sqrt(err / ref) <= 1e-6);
}

TEST_CASE("zero block synthesizes to silence and one frame to w^2 x") {
  StftConfig cfg;
  StftFrameBlock zero(cfg, 4, 1);
  for (const auto& ch : stft_synthesize(zero))
    for (double v : ch) CHECK(v == 0.0);

  std::vector<double> x(cfg.frame_len);
  Rng rng(3);
  for (auto& v : x) v = rng.gaussian();
  const auto block = stft_analyze({x}, cfg);
  REQUIRE(block.num_frames() == 1);
  const auto y = stft_synthesize(block);
  const auto w = make_window(cfg.frame_len, cfg.window);
  for (int i = 0; i < cfg.frame_len; ++i)
    CHECK(y[0][i] == doctest::Approx(w[i] * w[i] * x[i]).epsilon(1e-10));
}

TEST_CASE("Parseval consistency per frame") {
  StftConfig cfg;
  Rng rng(11);
  std::vector<double> x(4096);
  for (auto& v : x) v = rng.gaussian();
  const auto w = make_window(cfg.frame_len, cfg.window);
  const auto block = stft_analyze({x}, cfg);

  for (int l = 0; l < block.num_frames(); ++l) {
    double time_energy = 0.0;
    for (int i = 0; i < cfg.frame_len; ++i) {
      const double s = x[l * cfg.hop + i] * w[i];
      time_energy += s * s;
    }
    // Extend the half spectrum to the full fft_size bins.
    double spec_energy = 0.0;
    for (int k = 0; k < block.num_bins(); ++k) {
      const double p = std::norm(block.at(l, k, 0));
      const bool shared = k == 0 || k == block.num_bins() - 1;
      spec_energy += shared ? p : 2.0 * p;
    }
    spec_energy /= cfg.fft_size;
    CHECK(spec_energy == doctest::Approx(time_energy).epsilon(1e-9));
  }
}

TEST_CASE("edge frames are flagged") {
  StftConfig cfg;
  const auto block = stft_analyze({std::vector<double>(2048, 1.0)}, cfg);
  CHECK(block.frame_is_edge(0));
  CHECK(block.frame_is_edge(block.num_frames() - 1));
  CHECK_FALSE(block.frame_is_edge(1));
}

TEST_CASE("WAV float32 round trip is lossless and PCM16 is quantized") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "chansel_wav_test";
  fs::create_directories(dir);
  Rng rng(5);
  std::vector<std::vector<double>> x(3, std::vector<double>(1000));
  for (auto& ch : x)
    for (auto& v : ch) v = 0.5 * rng.gaussian();
  for (auto& ch : x)
    for (auto& v : ch) v = std::clamp(v, -1.0, 1.0);

  write_wav(dir / "f32.wav", x, 16000.0, WavFormat::float32);
  const auto back = read_wav(dir / "f32.wav");
  CHECK(back.sample_rate == 16000.0);
  REQUIRE(back.num_channels() == 3);
  for (int c = 0; c < 3; ++c)
    for (size_t i = 0; i < x[c].size(); ++i)
      CHECK(back.channels[c][i] == doctest::Approx(x[c][i]).epsilon(1e-7));

  write_wav(dir / "p16.wav", x, 16000.0, WavFormat::pcm16);
  const auto back16 = read_wav(dir / "p16.wav");
  for (int c = 0; c < 3; ++c)
    for (size_t i = 0; i < x[c].size(); ++i)
      CHECK(std::abs(back16.channels[c][i] - x[c][i]) <= 1.0 / 32768.0);

  CHECK_THROWS_AS(read_wav(dir / "missing.wav"), SchemaError);
}

TEST_CASE("fft convolution matches a direct loop") {
  Rng rng(13);
  std::vector<double> a(100), b(37);
  for (auto& v : a) v = rng.gaussian();
  for (auto& v : b) v = rng.gaussian();
  const auto c = fft_convolve(a, b);
  REQUIRE(c.size() == a.size() + b.size() - 1);
  for (size_t n = 0; n < c.size(); ++n) {
    double direct = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
      if (n >= i && n - i < b.size()) direct += a[i] * b[n - i];
    CHECK(c[n] == doctest::Approx(direct).epsilon(1e-10));
  }
}
