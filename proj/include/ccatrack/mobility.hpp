// Smooth-Turn mobility: horizontal circling around random centers with
// Gaussian inverse turn radius and exponential leg durations, uniform
// vertical legs, attitude derived from the motion.
#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <string>

#include "ccatrack/angles.hpp"
#include "ccatrack/rng.hpp"

namespace ccatrack {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  double norm_xy() const { return std::sqrt(x * x + y * y); }
};

struct Attitude {
  double yaw = 0.0;    // psi
  double pitch = 0.0;  // theta
  double roll = 0.0;   // phi
};

struct UavState {
  Vec3 position;
  Attitude attitude;
  Vec3 velocity;      // finite difference (X(t) - X(t-1)) / dt
  Vec3 acceleration;  // finite difference of velocity
};

struct MobilityParams {
  double mean_turn_duration = 1.0;  // 1/lambda [s]
  double sigma_r2 = 0.05;           // variance of the inverse turn radius [(1/m)^2]
  double v_xy = 20.0;               // constant horizontal speed [m/s], the cap
  double v_z_min = 2.0, v_z_max = 3.0;  // vertical leg speed range [m/s]
  double d_r_min = 10.0, d_r_max = 300.0;  // allowed range to the r-UAV [m]
  double dt = 0.01;                 // slot duration [s]
};

/// Yaw from horizontal velocity, pitch from the climb angle, roll from the
/// coordinated-turn bank atan(|a_lat| / g). Degenerate headings hold the
/// previous yaw.
inline Attitude attitude_from_motion(const Vec3& v, const Vec3& a, double prev_yaw) {
  constexpr double g_accel = 9.81;
  Attitude att;
  double vxy = v.norm_xy();
  att.yaw = vxy > 1e-9 ? std::atan2(v.y, v.x) : prev_yaw;
  att.pitch = std::atan2(v.z, vxy);
  if (vxy > 1e-9) {
    // lateral = horizontal acceleration component perpendicular to the track
    double lat = (v.x * a.y - v.y * a.x) / vxy;
    att.roll = std::atan(lat / g_accel);
  }
  att.yaw = wrap_pi(att.yaw);
  att.pitch = wrap_pi(att.pitch);
  att.roll = wrap_pi(att.roll);
  return att;
}

/// One UAV's Smooth-Turn trajectory generator. Owns its RNG; stepping is
/// deterministic under a fixed seed.
class SmoothTurnMobility {
 public:
  SmoothTurnMobility(const MobilityParams& params, Vec3 start, double heading,
                     std::uint64_t seed)
      : params_(params), rng_(seed), pos_(start), heading_(heading) {
    state_.position = start;
    state_.attitude.yaw = wrap_pi(heading);
    begin_leg_();
  }

  const UavState& state() const { return state_; }
  const MobilityParams& params() const { return params_; }

  /// Advance one slot. Horizontal motion follows the current turn circle at
  /// constant speed (exact arc step, so the speed is slot-exact).
  UavState step() {
    if (leg_remaining_ <= 0.0) begin_leg_();
    leg_remaining_ -= params_.dt;
    advance_(params_.dt);
    return finish_step_();
  }

  /// Step while keeping the distance to `anchor` inside [d_r_min, d_r_max]:
  /// re-draws the turn biased toward/away from the anchor, then falls back to
  /// a radial projection onto the allowed shell.
  UavState step_constrained(const Vec3& anchor) {
    Vec3 saved_pos = pos_;
    double saved_heading = heading_;
    if (leg_remaining_ <= 0.0) begin_leg_();
    leg_remaining_ -= params_.dt;
    advance_(params_.dt);
    if (!in_range_(anchor)) {
      for (int attempt = 0; attempt < 8 && !in_range_(anchor); ++attempt) {
        pos_ = saved_pos;
        heading_ = saved_heading;
        // new turn with the heading biased toward (too far) or away from
        // (too close) the anchor
        double to_anchor = std::atan2(anchor.y - pos_.y, anchor.x - pos_.x);
        double dist = (pos_ - anchor).norm();
        double target = dist > params_.d_r_max ? to_anchor : to_anchor + kPi;
        heading_ = wrap_pi(target + rng_.normal(0.0, 0.2));
        inv_radius_ = rng_.normal(0.0, std::sqrt(params_.sigma_r2));
        leg_remaining_ = rng_.exponential(params_.mean_turn_duration);
        v_z_ = rng_.uniform(params_.v_z_min, params_.v_z_max);
        advance_(params_.dt);
      }
      if (!in_range_(anchor)) {
        // last resort: project onto the allowed shell around the anchor
        Vec3 d = pos_ - anchor;
        double dist = d.norm();
        double clamped = std::min(std::max(dist, params_.d_r_min), params_.d_r_max);
        if (dist > 1e-12) pos_ = anchor + d * (clamped / dist);
      }
    }
    return finish_step_();
  }

  /// Leg durations observed so far (testing hook for the renewal process).
  const std::vector<double>& leg_durations() const { return leg_durations_; }

 private:
  void begin_leg_() {
    inv_radius_ = rng_.normal(0.0, std::sqrt(params_.sigma_r2));
    double dur = rng_.exponential(params_.mean_turn_duration);
    leg_durations_.push_back(dur);
    leg_remaining_ = dur;
    v_z_ = rng_.uniform(params_.v_z_min, params_.v_z_max);
  }

  void advance_(double dt) {
    double s = params_.v_xy;
    if (std::fabs(inv_radius_) < 1e-9) {
      pos_.x += s * dt * std::cos(heading_);
      pos_.y += s * dt * std::sin(heading_);
    } else {
      double r = 1.0 / inv_radius_;  // signed; positive turns left
      double cx = pos_.x - r * std::sin(heading_);
      double cy = pos_.y + r * std::cos(heading_);
      double dtheta = s * dt * inv_radius_;
      double rel_x = pos_.x - cx, rel_y = pos_.y - cy;
      double c = std::cos(dtheta), sn = std::sin(dtheta);
      pos_.x = cx + rel_x * c - rel_y * sn;
      pos_.y = cy + rel_x * sn + rel_y * c;
      heading_ = heading_ + dtheta;
    }
    pos_.z += v_z_ * dt;
  }

  UavState finish_step_() {
    Vec3 new_v = (pos_ - state_.position) * (1.0 / params_.dt);
    Vec3 new_a = (new_v - state_.velocity) * (1.0 / params_.dt);
    if (!primed_) {
      // first step has no previous velocity; treat acceleration as zero
      new_a = {0.0, 0.0, 0.0};
      primed_ = true;
    }
    state_.position = pos_;
    state_.velocity = new_v;
    state_.acceleration = new_a;
    state_.attitude = attitude_from_motion(new_v, new_a, state_.attitude.yaw);
    return state_;
  }

  bool in_range_(const Vec3& anchor) const {
    double d = (pos_ - anchor).norm();
    return d >= params_.d_r_min && d <= params_.d_r_max;
  }

  MobilityParams params_;
  Rng rng_;
  Vec3 pos_;
  double heading_ = 0.0;
  double inv_radius_ = 0.0;
  double leg_remaining_ = 0.0;
  double v_z_ = 0.0;
  bool primed_ = false;
  UavState state_;
  std::vector<double> leg_durations_;
};

// --- trajectory CSV export / import (replay fixtures) -----------------------

inline void export_trajectory(const std::vector<UavState>& traj, std::ostream& os) {
  os << "slot,x,y,z,yaw,pitch,roll\n";
  char buf[256];
  for (size_t t = 0; t < traj.size(); ++t) {
    const UavState& s = traj[t];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t,
                  s.position.x, s.position.y, s.position.z, s.attitude.yaw,
                  s.attitude.pitch, s.attitude.roll);
    os << buf;
  }
}

inline std::vector<UavState> import_trajectory(std::istream& is) {
  std::vector<UavState> traj;
  std::string line;
  std::getline(is, line);  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    UavState s;
    std::istringstream ls(line);
    std::string tok;
    std::getline(ls, tok, ',');  // slot
    std::getline(ls, tok, ',');
    s.position.x = std::strtod(tok.c_str(), nullptr);
    std::getline(ls, tok, ',');
    s.position.y = std::strtod(tok.c_str(), nullptr);
    std::getline(ls, tok, ',');
    s.position.z = std::strtod(tok.c_str(), nullptr);
    std::getline(ls, tok, ',');
    s.attitude.yaw = std::strtod(tok.c_str(), nullptr);
    std::getline(ls, tok, ',');
    s.attitude.pitch = std::strtod(tok.c_str(), nullptr);
    std::getline(ls, tok, ',');
    s.attitude.roll = std::strtod(tok.c_str(), nullptr);
    traj.push_back(s);
  }
  return traj;
}

}  // namespace ccatrack
