#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "chansel/rir.hpp"
#include "chansel/rng.hpp"
#include "chansel/transfer.hpp"

using namespace chansel;

namespace {

TransferFunctionSet two_mic_set(const Eigen::MatrixXcd& column) {
  // One source, two mics, constant ATF across 4 bins.
  TransferFunctionSet atfs;
  Eigen::MatrixXcd a(2, 4);
  for (int k = 0; k < 4; ++k) a.col(k) = column;
  atfs.atf.push_back(a);
  atfs.impulse_responses = {{{1.0}, {1.0}}};
  return atfs;
}

}  // namespace

TEST_CASE("RATF is element-wise division with an exact reference element") {
  Eigen::MatrixXcd col(2, 1);
  col << cdouble(2.0, 0.0), cdouble(0.0, 4.0);
  const auto d = ratf_from_atf(two_mic_set(col), 0, 0);
  for (int k = 0; k < 4; ++k) {
    CHECK(d.d(0, k) == cdouble(1.0, 0.0));
    CHECK(d.d(1, k).real() == doctest::Approx(0.0));
    CHECK(d.d(1, k).imag() == doctest::Approx(2.0));
  }
  d.validate();
}

TEST_CASE("zero reference ATF raises a degenerate-reference error") {
  Eigen::MatrixXcd col(2, 1);
  col << cdouble(0.0, 0.0), cdouble(1.0, 0.0);
  CHECK_THROWS_WITH_AS(ratf_from_atf(two_mic_set(col), 0, 0),
                       doctest::Contains("degenerate reference"), NumericalError);
}

TEST_CASE("RATF is invariant to scaling the ATF column") {
  Rng rng(17);
  TransferFunctionSet atfs;
  Eigen::MatrixXcd a(3, 8);
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 8; ++k) a(m, k) = rng.circular_gaussian() + cdouble(2.0, 0.0);
  atfs.atf.push_back(a);
  const auto d1 = ratf_from_atf(atfs, 0, 1);

  const cdouble c(0.3, -1.7);
  atfs.atf[0] *= c;
  const auto d2 = ratf_from_atf(atfs, 0, 1);
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 8; ++k) CHECK(std::abs(d1.d(m, k) - d2.d(m, k)) <= 1e-12);
}

TEST_CASE("anechoic free-field RATF matches the closed-form delay/attenuation law") {
  // Image method with full absorption leaves only the direct path, whose
  // RATF is dist_ref/dist_m with a pure relative delay.
  RoomSpec room;
  room.dims = {8.0, 7.0, 3.0};
  room.t60 = 0.0;
  const double fs = 16000.0;
  const int fft_size = 512;
  const Vec3 src{2.0, 3.5, 1.5};
  const Vec3 mic0{5.0, 3.5, 1.5};
  const Vec3 mic1{5.4, 3.9, 1.5};

  std::vector<std::vector<std::vector<double>>> rirs{
      {image_rir(room, src, mic0, fs), image_rir(room, src, mic1, fs)}};
  const auto atfs = atfs_from_rirs(std::move(rirs), fft_size);
  const auto d = ratf_from_atf(atfs, 0, 0);

  const double d0 = distance(src, mic0), d1 = distance(src, mic1);
  const double delay_diff_samples = (d1 - d0) / room.speed_of_sound * fs;
  for (int k = 2; k < static_cast<int>(0.75 * fft_size / 2); ++k) {
    const double expected_mag = d0 / d1;
    const double expected_phase = -2.0 * kPi * k * delay_diff_samples / fft_size;
    CHECK(std::abs(d.d(1, k)) == doctest::Approx(expected_mag).epsilon(0.02));
    const cdouble expected = std::polar(expected_mag, expected_phase);
    CHECK(std::abs(d.d(1, k) - expected) <= 0.05 * expected_mag);
  }
}

TEST_CASE("substituting an identical steering vector is a no-op") {
  Rng rng(23);
  SteeringVector d;
  d.reference_mic = 0;
  d.d.resize(2, 6);
  for (int k = 0; k < 6; ++k) {
    d.d(0, k) = cdouble(1.0, 0.0);
    d.d(1, k) = rng.circular_gaussian();
  }
  SteeringPerturbation p;
  p.kind = SteeringPerturbation::Kind::substitute;
  p.substitute = d;
  const auto out = perturb_steering(d, p);
  CHECK(out.d == d.d);
}

TEST_CASE("rotate mode swaps in the nearest available azimuth and flags gaps") {
  RoomSpec room;
  room.dims = {8.0, 7.0, 3.0};
  const double fs = 16000.0;
  const Vec3 mic0{4.0, 3.5, 1.5}, mic1{4.0, 3.6, 1.5};
  std::vector<std::vector<std::vector<double>>> rirs;
  std::vector<double> azimuths{0.0, 90.0, 180.0, 270.0};
  for (double az : azimuths) {
    const Vec3 src{4.0 + 2.0 * std::cos(az * kPi / 180.0), 3.5 + 2.0 * std::sin(az * kPi / 180.0),
                   1.5};
    rirs.push_back({image_rir(room, src, mic0, fs), image_rir(room, src, mic1, fs)});
  }
  const auto atfs = atfs_from_rirs(std::move(rirs), 512);
  const auto frontal = ratf_from_atf(atfs, 0, 0);
  const auto side = ratf_from_atf(atfs, 1, 0);

  SteeringPerturbation p;
  p.kind = SteeringPerturbation::Kind::rotate;
  p.atfs = &atfs;
  p.source_azimuths_deg = azimuths;
  p.rotate_deg = 80.0;  // nearest available is 90
  const auto rotated = perturb_steering(frontal, p);
  CHECK(rotated.d == side.d);

  SteeringPerturbation bad;
  bad.kind = SteeringPerturbation::Kind::rotate;
  bad.atfs = &atfs;
  bad.rotate_deg = 45.0;  // azimuth list missing entirely
  CHECK_THROWS_AS(perturb_steering(frontal, bad), std::invalid_argument);
}

TEST_CASE("jitter keeps the reference row normalized") {
  SteeringVector d;
  d.reference_mic = 1;
  d.d = Eigen::MatrixXcd::Constant(3, 5, cdouble(0.5, 0.5));
  d.d.row(1).setConstant(cdouble(1.0, 0.0));
  const auto out = jitter_steering(d, 0.2, 0.3, 99);
  out.validate();
  bool changed = false;
  for (int k = 0; k < 5; ++k) changed |= out.d(0, k) != d.d(0, k);
  CHECK(changed);
  // Same seed reproduces.
  const auto out2 = jitter_steering(d, 0.2, 0.3, 99);
  CHECK(out.d == out2.d);
}

TEST_CASE("steering CSV round trip") {
  namespace fs = std::filesystem;
  Rng rng(31);
  SteeringVector d;
  d.reference_mic = 0;
  d.d.resize(4, 257);
  for (int k = 0; k < 257; ++k) {
    d.d(0, k) = cdouble(1.0, 0.0);
    for (int m = 1; m < 4; ++m) d.d(m, k) = rng.circular_gaussian();
  }
  const fs::path path = fs::temp_directory_path() / "chansel_steering_test.csv";
  write_steering_csv(path, d);
  const auto back = read_steering_csv(path);
  CHECK(back.reference_mic == 0);
  REQUIRE(back.num_mics() == 4);
  REQUIRE(back.num_bins() == 257);
  for (int m = 0; m < 4; ++m)
    for (int k = 0; k < 257; ++k) CHECK(std::abs(back.d(m, k) - d.d(m, k)) <= 1e-15);
}

TEST_CASE("IR set save/load round trip reproduces the ATFs") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "chansel_irset_test";
  fs::create_directories(dir);

  RoomSpec room;
  room.dims = {6.0, 5.0, 3.0};
  room.t60 = 0.15;
  StftConfig cfg;
  std::vector<std::vector<std::vector<double>>> rirs;
  std::vector<double> azimuths{0.0, 22.5};
  for (double az : azimuths) {
    const Vec3 src{3.0 + 1.9 * std::cos(az * kPi / 180.0), 2.5 + 1.9 * std::sin(az * kPi / 180.0),
                   1.5};
    rirs.push_back({image_rir(room, src, {3.0, 2.59, 1.5}, cfg.sample_rate),
                    image_rir(room, src, {3.0, 2.41, 1.5}, cfg.sample_rate)});
  }
  save_ir_set(dir / "manifest.json", rirs, azimuths, cfg);
  const auto loaded = load_ir_set(dir / "manifest.json", cfg);
  REQUIRE(loaded.transfers.num_sources() == 2);
  REQUIRE(loaded.transfers.num_mics() == 2);
  CHECK(loaded.azimuths_deg[0] == doctest::Approx(0.0));
  CHECK(loaded.azimuths_deg[1] == doctest::Approx(22.5));

  const auto reference = atfs_from_rirs(std::move(rirs), cfg.fft_size);
  for (int s = 0; s < 2; ++s)
    for (int m = 0; m < 2; ++m)
      for (int k = 0; k < cfg.num_bins(); ++k) {
        // float32 WAV quantization bounds the round-trip error
        CHECK(std::abs(loaded.transfers.atf[s](m, k) - reference.atf[s](m, k)) <= 1e-5);
      }

  CHECK_THROWS_AS(load_ir_set(dir / "nope.json", cfg), SchemaError);
}
