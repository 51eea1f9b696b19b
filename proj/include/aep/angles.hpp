#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace aep {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Maps any finite angle into [0, 2pi).
inline double wrap_angle(double theta) noexcept {
  if (theta >= 0.0 && theta < kTwoPi) return theta;
  double r = std::fmod(theta, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Signed angular difference a - b in [-pi, pi).
inline double angle_difference(double a, double b) noexcept {
  double d = std::fmod(a - b + kPi, kTwoPi);
  if (d < 0.0) d += kTwoPi;
  return d - kPi;
}

/// M equal angle bins. Bin k is centred on 2*pi*k/M and covers
/// [2*pi*(k - 1/2)/M, 2*pi*(k + 1/2)/M), so M = 2 puts the two bins on 0 and pi.
class AngleBins {
 public:
  explicit AngleBins(int count) : count_(count) {
    if (count < 1) throw std::invalid_argument("angle bin count must be positive, got " + std::to_string(count));
  }

  int count() const noexcept { return count_; }
  double width() const noexcept { return kTwoPi / count_; }
  double center(int k) const noexcept { return width() * k; }
  double lower_edge(int k) const noexcept { return center(k) - 0.5 * width(); }

  int index_of(double theta) const noexcept {
    const double shifted = wrap_angle(theta + 0.5 * width());
    int k = static_cast<int>(shifted / width());
    return k >= count_ ? count_ - 1 : k;
  }

  friend bool operator==(const AngleBins&, const AngleBins&) = default;

 private:
  int count_;
};

}  // namespace aep
