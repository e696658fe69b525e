#include "chansel/rir.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chansel {

namespace {

constexpr int kSincTaps = 8;

double sinc_norm(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

// Hann-windowed sinc centered on the fractional arrival time.
void add_fractional_impulse(std::vector<double>& h, double delay_samples, double gain) {
  const long fdel = static_cast<long>(std::floor(delay_samples));
  const double frac = delay_samples - fdel;
  const long start = fdel - kSincTaps / 2 + 1;
  for (int n = 0; n < kSincTaps; ++n) {
    const double t = (n - 0.5 * kSincTaps + 1) - frac;
    const long pos = start + n;
    if (pos < 0 || pos >= static_cast<long>(h.size())) continue;
    const double w = 0.5 * (1.0 + std::cos(2.0 * kPi * t / kSincTaps));
    h[pos] += gain * w * sinc_norm(t);
  }
}

}  // namespace

void RoomSpec::validate() const {
  if (dims.x <= 0.0 || dims.y <= 0.0 || dims.z <= 0.0)
    throw std::invalid_argument("RoomSpec: dimensions must be positive");
  if (t60 < 0.0) throw std::invalid_argument("RoomSpec: t60 must be >= 0");
  if (speed_of_sound <= 0.0) throw std::invalid_argument("RoomSpec: speed of sound must be > 0");
  if (max_image_order < -1) throw std::invalid_argument("RoomSpec: bad image order");
  if (wall_absorption)
    for (double a : *wall_absorption)
      if (a < 0.0 || a > 1.0)
        throw std::invalid_argument("RoomSpec: absorption coefficients must be in [0,1]");
}

bool RoomSpec::anechoic() const {
  if (wall_absorption) {
    for (double a : *wall_absorption)
      if (a < 1.0) return false;
    return true;
  }
  return t60 == 0.0;
}

double sabine_absorption(const Vec3& dims, double t60) {
  if (t60 <= 0.0) return 1.0;
  const double volume = dims.x * dims.y * dims.z;
  const double surface = 2.0 * (dims.x * dims.y + dims.y * dims.z + dims.x * dims.z);
  const double alpha = 0.161 * volume / (surface * t60);
  if (alpha > 1.0)
    throw std::invalid_argument("sabine_absorption: room too small for the requested T60");
  return alpha;
}

std::vector<double> image_rir(const RoomSpec& room, const Vec3& src, const Vec3& mic, double fs,
                              double duration_s) {
  room.validate();
  if (fs <= 0.0) throw std::invalid_argument("image_rir: bad sample rate");
  const auto inside = [&](const Vec3& p) {
    return p.x > 0.0 && p.x < room.dims.x && p.y > 0.0 && p.y < room.dims.y && p.z > 0.0 &&
           p.z < room.dims.z;
  };
  if (!inside(src) || !inside(mic))
    throw std::invalid_argument("image_rir: source and microphone must be inside the room");
  const double dist_direct = distance(src, mic);
  if (dist_direct < 1e-9)
    throw std::invalid_argument("image_rir: source and microphone coincide");

  std::array<double, 6> beta{};
  if (room.wall_absorption) {
    for (int i = 0; i < 6; ++i) beta[i] = std::sqrt(std::max(0.0, 1.0 - (*room.wall_absorption)[i]));
  } else {
    const double b = std::sqrt(std::max(0.0, 1.0 - sabine_absorption(room.dims, room.t60)));
    beta.fill(b);
  }

  const double c = room.speed_of_sound;
  if (duration_s <= 0.0) {
    const double tail = room.anechoic() ? 0.02 : 1.5 * room.t60;
    duration_s = dist_direct / c + tail + 0.01;
  }
  const long num_samples = std::max<long>(static_cast<long>(std::ceil(duration_s * fs)), kSincTaps);
  std::vector<double> h(num_samples, 0.0);

  const double samples_per_meter = fs / c;
  const double lx = room.dims.x * samples_per_meter;
  const double ly = room.dims.y * samples_per_meter;
  const double lz = room.dims.z * samples_per_meter;
  const double sx = src.x * samples_per_meter, sy = src.y * samples_per_meter,
               sz = src.z * samples_per_meter;
  const double rx = mic.x * samples_per_meter, ry = mic.y * samples_per_meter,
               rz = mic.z * samples_per_meter;

  int n1 = static_cast<int>(std::ceil(num_samples / (2.0 * lx)));
  int n2 = static_cast<int>(std::ceil(num_samples / (2.0 * ly)));
  int n3 = static_cast<int>(std::ceil(num_samples / (2.0 * lz)));
  if (room.anechoic()) n1 = n2 = n3 = 0;

  const int order = room.max_image_order;
  for (int mx = -n1; mx <= n1; ++mx) {
    for (int my = -n2; my <= n2; ++my) {
      for (int mz = -n3; mz <= n3; ++mz) {
        for (int q = 0; q <= 1; ++q) {
          const double dx = (1 - 2 * q) * sx - rx + 2 * mx * lx;
          const double bx = std::pow(beta[0], std::abs(mx - q)) * std::pow(beta[1], std::abs(mx));
          for (int j = 0; j <= 1; ++j) {
            const double dy = (1 - 2 * j) * sy - ry + 2 * my * ly;
            const double by = std::pow(beta[2], std::abs(my - j)) * std::pow(beta[3], std::abs(my));
            for (int kk = 0; kk <= 1; ++kk) {
              if (order >= 0 &&
                  std::abs(2 * mx - q) + std::abs(2 * my - j) + std::abs(2 * mz - kk) > order)
                continue;
              const double dz = (1 - 2 * kk) * sz - rz + 2 * mz * lz;
              const double bz =
                  std::pow(beta[4], std::abs(mz - kk)) * std::pow(beta[5], std::abs(mz));
              const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
              if (dist >= num_samples - kSincTaps) continue;
              const double refl = bx * by * bz;
              if (refl == 0.0 && (mx != 0 || my != 0 || mz != 0 || q != 0 || j != 0 || kk != 0))
                continue;
              const double dist_m = dist / samples_per_meter;
              const double gain = refl / (4.0 * kPi * std::max(dist_m, 1e-6));
              add_fractional_impulse(h, dist, gain);
            }
          }
        }
      }
    }
  }
  return h;
}

double schroeder_t60(std::span<const double> rir, double fs) {
  if (rir.empty() || fs <= 0.0) throw std::invalid_argument("schroeder_t60: bad input");
  std::vector<double> edc(rir.size());
  double acc = 0.0;
  for (long i = static_cast<long>(rir.size()) - 1; i >= 0; --i) {
    acc += rir[i] * rir[i];
    edc[i] = acc;
  }
  if (acc <= 0.0) return 0.0;
  const double total = acc;

  // Time of first crossing below the given level (dB re total energy).
  const auto crossing_time = [&](double level_db) -> double {
    const double threshold = total * power_ratio_from_db(level_db);
    for (size_t i = 0; i < edc.size(); ++i)
      if (edc[i] <= threshold) return static_cast<double>(i) / fs;
    return static_cast<double>(edc.size()) / fs;
  };

  const double t5 = crossing_time(-5.0);
  const double t35 = crossing_time(-35.0);
  if (t35 <= t5) return 0.0;
  return 2.0 * (t35 - t5);
}

}  // namespace chansel
