#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "chansel/common.hpp"

namespace chansel {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    const double n = norm();
    if (n == 0.0) throw std::invalid_argument("Vec3: cannot normalize zero vector");
    return *this * (1.0 / n);
  }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

struct TalkerPosition {
  double azimuth_deg = 0.0;
  double radius_m = 1.9;
  double height_m = 1.5;
};

// Head faces +x; azimuth counterclockwise about z, so positive azimuths are
// on the user's left.
struct SceneGeometry {
  Vec3 room_dims{6.0, 5.0, 3.0};
  Vec3 ha_user_position{3.0, 2.5, 1.5};
  std::vector<Vec3> ha_mic_offsets = default_ha_mic_offsets();
  std::vector<TalkerPosition> talker_positions;
  std::vector<Vec3> rm_positions;

  // Two mics per ear, 0.01 m front/rear spacing, +-0.09 m lateral.
  // Channel 0 is the left-front (reference) microphone.
  static std::vector<Vec3> default_ha_mic_offsets() {
    return {{0.005, 0.09, 0.0}, {-0.005, 0.09, 0.0}, {0.005, -0.09, 0.0}, {-0.005, -0.09, 0.0}};
  }

  int num_mics() const { return static_cast<int>(ha_mic_offsets.size()); }

  Vec3 ha_mic_world(int m) const { return ha_user_position + ha_mic_offsets.at(m); }

  Vec3 talker_world(int i) const {
    const TalkerPosition& t = talker_positions.at(i);
    const double az = t.azimuth_deg * kPi / 180.0;
    return {ha_user_position.x + t.radius_m * std::cos(az),
            ha_user_position.y + t.radius_m * std::sin(az), t.height_m};
  }

  bool inside_room(const Vec3& p) const {
    return p.x > 0.0 && p.x < room_dims.x && p.y > 0.0 && p.y < room_dims.y && p.z > 0.0 &&
           p.z < room_dims.z;
  }

  void validate() const {
    if (num_mics() < 2) throw std::invalid_argument("SceneGeometry: need M >= 2 HA microphones");
    for (int m = 0; m < num_mics(); ++m)
      if (!inside_room(ha_mic_world(m)))
        throw std::invalid_argument("SceneGeometry: HA microphone " + std::to_string(m) +
                                    " outside room");
    for (size_t i = 0; i < talker_positions.size(); ++i) {
      if (!inside_room(talker_world(static_cast<int>(i))))
        throw std::invalid_argument("SceneGeometry: talker " + std::to_string(i) +
                                    " outside room");
      for (size_t j = i + 1; j < talker_positions.size(); ++j)
        if (talker_positions[i].azimuth_deg == talker_positions[j].azimuth_deg)
          throw std::invalid_argument("SceneGeometry: duplicate talker azimuth " +
                                      std::to_string(talker_positions[i].azimuth_deg));
    }
    for (const auto& rm : rm_positions)
      if (!inside_room(rm)) throw std::invalid_argument("SceneGeometry: RM position outside room");
  }
};

// The 16-azimuth candidate circle of the close-talking setup.
inline std::vector<TalkerPosition> talker_circle(int count = 16, double radius_m = 1.9,
                                                 double height_m = 1.5) {
  std::vector<TalkerPosition> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back({360.0 * i / count, radius_m, height_m});
  return out;
}

}  // namespace chansel
