#pragma once

#include <cmath>
#include <numbers>

namespace teleop {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

/// Signed shortest difference a - b, in (-pi, pi].
inline double angle_diff(double a, double b) { return normalize_angle(a - b); }

/// Circular mean of two headings.
inline double mean_angle(double a, double b) {
  return normalize_angle(b + 0.5 * angle_diff(a, b));
}

}  // namespace teleop
