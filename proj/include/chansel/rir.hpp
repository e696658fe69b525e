#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "chansel/geometry.hpp"

namespace chansel {

struct RoomSpec {
  Vec3 dims{6.0, 5.0, 3.0};
  double t60 = 0.0;  // 0 = anechoic (unless wall_absorption given)
  // Per-wall absorption {x0, x1, y0, y1, z0, z1}; overrides t60 when set.
  std::optional<std::array<double, 6>> wall_absorption;
  int max_image_order = -1;  // -1 = every image within the RIR length
  double speed_of_sound = 343.0;

  void validate() const;
  bool anechoic() const;
};

// Uniform Sabine absorption achieving the target T60 in this room.
double sabine_absorption(const Vec3& dims, double t60);

// Allen-Berkley image method with 8-tap Hann-windowed-sinc fractional
// delays and 1/(4*pi*d) distance attenuation. duration_s = 0 picks
// 1.5*T60 (plus direct delay), or a short anechoic default.
std::vector<double> image_rir(const RoomSpec& room, const Vec3& src, const Vec3& mic, double fs,
                              double duration_s = 0.0);

// Reverberation time from the Schroeder backward integral: linear fit of
// the decay between -5 and -35 dB, extrapolated to 60 dB.
double schroeder_t60(std::span<const double> rir, double fs);

}  // namespace chansel
