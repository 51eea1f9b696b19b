#pragma once

// Alignment (Glauber) rates. The resampling density of the angle at x is
//   c(theta) = exp(beta sum_{y~x} eta_y cos(theta_y - theta)) / Z.
// With (R, phi) the polar form of sum_y eta_y (cos theta_y, sin theta_y) the
// exponent is beta R cos(theta - phi), so c is the von Mises density with
// location phi and concentration beta R, and Z = 2 pi I0(beta R).
//
// In the two-type model angles live on {0, pi} and the same weights are
// renormalized over the two atoms.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aep/angles.hpp"
#include "aep/bessel.hpp"
#include "aep/configuration.hpp"
#include "aep/rng.hpp"

namespace aep {

struct Resultant {
  double x = 0.0;
  double y = 0.0;

  double norm() const noexcept { return std::hypot(x, y); }
  double direction() const noexcept { return wrap_angle(std::atan2(y, x)); }
};

/// Sum over the four lattice directions of eta_y (cos theta_y, sin theta_y).
/// On degenerate tori a site can be its own neighbor; it is then counted.
inline Resultant neighbor_resultant(const Configuration& c, int site) {
  const auto& g = c.geometry();
  Resultant r;
  for (int axis = 0; axis < 2; ++axis)
    for (int dir = -1; dir <= 1; dir += 2) {
      const int y = g.neighbor(site, axis, dir);
      if (!c.occupied(y)) continue;
      r.x += std::cos(c.angle(y));
      r.y += std::sin(c.angle(y));
    }
  return r;
}

/// sum_{y~x} eta_y cos(theta_y): the field seen by a two-type particle.
inline double two_type_field(const Configuration& c, int site) {
  const auto& g = c.geometry();
  double s = 0.0;
  for (int axis = 0; axis < 2; ++axis)
    for (int dir = -1; dir <= 1; dir += 2) {
      const int y = g.neighbor(site, axis, dir);
      if (c.occupied(y)) s += c.angle(y) == 0.0 ? 1.0 : -1.0;
    }
  return s;
}

/// Probability of choosing angle 0 in the two-type model under field s.
inline double two_type_up_probability(double field, double beta) noexcept {
  return 1.0 / (1.0 + std::exp(-2.0 * beta * field));
}

inline double von_mises_density(double theta, double location, double concentration) {
  if (concentration < 0.0) throw std::invalid_argument("von Mises concentration must be nonnegative");
  return std::exp(concentration * (std::cos(theta - location) - 1.0)) /
         (kTwoPi * bessel_i0_scaled(concentration));
}

/// Best-Fisher rejection sampler, in the form used by numpy.
inline double sample_von_mises(Rng& rng, double location, double concentration) {
  if (concentration < 1e-8) return kTwoPi * uniform01(rng);
  double s;
  if (concentration < 1e-5) {
    s = 1.0 / concentration + concentration;
  } else {
    const double r = 1.0 + std::sqrt(1.0 + 4.0 * concentration * concentration);
    const double rho = (r - std::sqrt(2.0 * r)) / (2.0 * concentration);
    s = (1.0 + rho * rho) / (2.0 * rho);
  }
  double w;
  for (;;) {
    const double u = uniform01(rng);
    const double z = std::cos(kPi * u);
    w = (1.0 + s * z) / (s + z);
    const double y = concentration * (s - w);
    const double v = uniform01(rng);
    if (y * (2.0 - y) - v >= 0.0 || std::log(y / v) + 1.0 - y >= 0.0) break;
  }
  double theta = std::acos(std::clamp(w, -1.0, 1.0));
  if (uniform01(rng) < 0.5) theta = -theta;
  return wrap_angle(theta + location);
}

/// c_{x,beta}(theta, eta) for an occupied site x.
inline double glauber_density(const Configuration& c, int site, double theta, double beta) {
  if (!c.occupied(site)) throw std::invalid_argument("glauber_density: site " + std::to_string(site) + " is empty");
  const Resultant r = neighbor_resultant(c, site);
  const double R = r.norm();
  if (R == 0.0 || beta == 0.0) return 1.0 / kTwoPi;
  return von_mises_density(theta, r.direction(), beta * R);
}

/// Exact draw from c_{x,beta}(., eta).
inline double sample_glauber_angle(const Configuration& c, int site, double beta, Rng& rng) {
  if (!c.occupied(site)) throw std::invalid_argument("sample_glauber_angle: site " + std::to_string(site) + " is empty");
  const Resultant r = neighbor_resultant(c, site);
  const double R = r.norm();
  if (R == 0.0 || beta == 0.0) return kTwoPi * uniform01(rng);
  return sample_von_mises(rng, r.direction(), beta * R);
}

inline double sample_two_type_angle(const Configuration& c, int site, double beta, Rng& rng) {
  return uniform01(rng) < two_type_up_probability(two_type_field(c, site), beta) ? 0.0 : kPi;
}

}  // namespace aep
