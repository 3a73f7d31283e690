// Coordinate frames: global -> body (attitude) -> array (mounting), and the
// geometric AOD/AOA of the inter-UAV line of sight in each array's frame.
#pragma once

#include "ccatrack/mobility.hpp"

namespace ccatrack {

/// 3x3 rotation matrix, row-major.
struct Rot3 {
  double m[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  static Rot3 identity() { return Rot3{}; }

  /// Body-to-global rotation from ZYX Euler angles (yaw, pitch, roll).
  static Rot3 from_euler(double yaw, double pitch, double roll) {
    double cy = std::cos(yaw), sy = std::sin(yaw);
    double cp = std::cos(pitch), sp = std::sin(pitch);
    double cr = std::cos(roll), sr = std::sin(roll);
    Rot3 r;
    r.m[0][0] = cy * cp;
    r.m[0][1] = cy * sp * sr - sy * cr;
    r.m[0][2] = cy * sp * cr + sy * sr;
    r.m[1][0] = sy * cp;
    r.m[1][1] = sy * sp * sr + cy * cr;
    r.m[1][2] = sy * sp * cr - cy * sr;
    r.m[2][0] = -sp;
    r.m[2][1] = cp * sr;
    r.m[2][2] = cp * cr;
    return r;
  }

  static Rot3 from_attitude(const Attitude& a) { return from_euler(a.yaw, a.pitch, a.roll); }

  Vec3 apply(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }

  /// Transpose application (the inverse rotation).
  Vec3 apply_t(const Vec3& v) const {
    return {m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
            m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
            m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z};
  }

  Rot3 compose(const Rot3& o) const {  // this * o
    Rot3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        r.m[i][j] = 0.0;
        for (int k = 0; k < 3; ++k) r.m[i][j] += m[i][k] * o.m[k][j];
      }
    return r;
  }

  /// ZYX Euler extraction (inverse of from_euler away from gimbal lock).
  Attitude to_euler() const {
    Attitude a;
    a.pitch = std::asin(std::clamp(-m[2][0], -1.0, 1.0));
    if (std::fabs(m[2][0]) < 1.0 - 1e-12) {
      a.yaw = std::atan2(m[1][0], m[0][0]);
      a.roll = std::atan2(m[2][1], m[2][2]);
    } else {
      a.yaw = std::atan2(-m[0][1], m[1][1]);
      a.roll = 0.0;
    }
    return a;
  }
};

/// Array mounting: orientation of the array frame within the body frame.
/// Identity means the cylinder axis is the body z axis (CCA wrapped around a
/// vertical section) and the planar baseline faces the body +x axis.
struct MountingPose {
  Rot3 body_to_array_t = Rot3::identity();  // stored as array-frame axes in body coords

  static MountingPose identity() { return MountingPose{}; }
  static MountingPose from_euler(double yaw, double pitch, double roll) {
    return MountingPose{Rot3::from_euler(yaw, pitch, roll)};
  }

  /// body-frame vector -> array-frame vector
  Vec3 to_array(const Vec3& v_body) const { return body_to_array_t.apply_t(v_body); }
};

struct AnglePair {
  double az = 0.0;  // [0, 2*pi)
  double el = 0.0;  // [0, pi]
};

/// Azimuth/elevation of a global-frame unit vector seen from a platform with
/// the given attitude and array mounting.
inline AnglePair direction_in_array_frame(const Vec3& u_global, const Attitude& attitude,
                                          const MountingPose& mount) {
  Rot3 body_to_global = Rot3::from_attitude(attitude);
  Vec3 u_body = body_to_global.apply_t(u_global);
  Vec3 u = mount.to_array(u_body);
  AnglePair a;
  a.az = wrap_two_pi(std::atan2(u.y, u.x));
  a.el = std::acos(std::clamp(u.z, -1.0, 1.0));
  return a;
}

struct LinkAngles {
  AnglePair aod;  // at the transmit array
  AnglePair aoa;  // at the receive array
};

/// AOD/AOA of the LoS path between two UAV states, in their array frames.
inline LinkAngles geometric_angles(const UavState& tx, const UavState& rx,
                                   const MountingPose& tx_mount, const MountingPose& rx_mount) {
  Vec3 d = rx.position - tx.position;
  double dist = d.norm();
  if (dist <= 0.0) throw std::invalid_argument("geometric_angles: coincident positions");
  Vec3 u = d * (1.0 / dist);
  LinkAngles la;
  la.aod = direction_in_array_frame(u, tx.attitude, tx_mount);
  la.aoa = direction_in_array_frame(u * -1.0, rx.attitude, rx_mount);
  return la;
}

}  // namespace ccatrack
