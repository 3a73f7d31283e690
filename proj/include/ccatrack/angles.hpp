// Angle wrapping and interval helpers shared by the array/codebook/tracking code.
#pragma once

#include <cmath>

namespace ccatrack {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wrap an angle into [0, 2*pi).
inline double wrap_two_pi(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  // fmod can return 2*pi after the correction when a is a tiny negative number
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Wrap an angle into (-pi, pi].
inline double wrap_pi(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r > kPi) r -= kTwoPi;
  if (r <= -kPi) r += kTwoPi;
  return r;
}

/// Shortest signed angular difference a - b, in (-pi, pi].
inline double ang_diff(double a, double b) { return wrap_pi(a - b); }

/// Absolute circular distance between two angles, in [0, pi].
inline double ang_dist(double a, double b) { return std::fabs(wrap_pi(a - b)); }

/// Closed circular interval membership: is `a` within +-half_width of `center`?
inline bool in_sector(double a, double center, double half_width) {
  if (half_width >= kPi) return true;  // sector spans the full circle
  return ang_dist(a, center) <= half_width;
}

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace ccatrack
