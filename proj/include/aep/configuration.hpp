#pragma once

// Lattice configurations (eta_x, theta_x) on the torus. Empty sites carry the
// sentinel angle 0; observables must mask by occupancy before reading angles.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aep/angles.hpp"
#include "aep/torus.hpp"

namespace aep {

class Configuration {
 public:
  explicit Configuration(TorusGeometry geom)
      : geom_(geom),
        occ_(geom.site_count(), 0),
        angle_(geom.site_count(), 0.0),
        slot_(geom.site_count(), -1) {}

  const TorusGeometry& geometry() const noexcept { return geom_; }
  int side() const noexcept { return geom_.side(); }
  std::size_t site_count() const noexcept { return occ_.size(); }

  bool occupied(int site) const noexcept { return occ_[site] != 0; }
  int eta(int site) const noexcept { return occ_[site]; }
  double angle(int site) const noexcept { return angle_[site]; }

  std::size_t particle_count() const noexcept { return particles_.size(); }

  /// Occupied sites indexed by particle slot. A slot follows its particle
  /// through moves, so it doubles as a tracer tag.
  std::span<const int> particles() const noexcept { return particles_; }
  int slot_of(int site) const noexcept { return slot_[site]; }

  void place(int site, double theta) {
    check_site(site);
    if (occ_[site]) throw std::invalid_argument("site " + std::to_string(site) + " already occupied");
    occ_[site] = 1;
    angle_[site] = wrap_angle(theta);
    slot_[site] = static_cast<int>(particles_.size());
    particles_.push_back(site);
  }

  void remove(int site) {
    check_site(site);
    if (!occ_[site]) throw std::invalid_argument("site " + std::to_string(site) + " is empty");
    const int slot = slot_[site];
    const int last_site = particles_.back();
    particles_[slot] = last_site;
    slot_[last_site] = slot;
    particles_.pop_back();
    occ_[site] = 0;
    angle_[site] = 0.0;
    slot_[site] = -1;
  }

  /// Moves the particle at `from` to the empty site `to`. Keeps its slot.
  void move(int from, int to) {
    if (!occ_[from] || occ_[to]) throw std::invalid_argument("move requires an occupied source and an empty target");
    move_unchecked(from, to);
  }

  void move_unchecked(int from, int to) noexcept {
    const int slot = slot_[from];
    occ_[to] = 1;
    angle_[to] = angle_[from];
    slot_[to] = slot;
    particles_[slot] = to;
    occ_[from] = 0;
    angle_[from] = 0.0;
    slot_[from] = -1;
  }

  /// Exchanges the full states of two sites (the map eta -> eta^{x,y}).
  void exchange(int x, int y) {
    check_site(x);
    check_site(y);
    if (x == y) return;
    std::swap(occ_[x], occ_[y]);
    std::swap(angle_[x], angle_[y]);
    std::swap(slot_[x], slot_[y]);
    if (slot_[x] >= 0) particles_[slot_[x]] = x;
    if (slot_[y] >= 0) particles_[slot_[y]] = y;
  }

  void set_angle(int site, double theta) {
    check_site(site);
    if (!occ_[site]) throw std::invalid_argument("cannot set the angle of empty site " + std::to_string(site));
    angle_[site] = wrap_angle(theta);
  }

  void set_angle_unchecked(int site, double theta) noexcept { angle_[site] = theta; }

  /// Returns an empty string when every internal invariant holds.
  std::string invariant_violation() const {
    std::size_t count = 0;
    for (std::size_t s = 0; s < occ_.size(); ++s) {
      if (occ_[s] > 1) return "occupancy is not a bit at site " + std::to_string(s);
      if (!occ_[s]) {
        if (angle_[s] != 0.0) return "empty site " + std::to_string(s) + " has nonzero angle";
        if (slot_[s] != -1) return "empty site " + std::to_string(s) + " has a slot";
        continue;
      }
      ++count;
      if (angle_[s] < 0.0 || angle_[s] >= kTwoPi) return "angle out of range at site " + std::to_string(s);
      const int slot = slot_[s];
      if (slot < 0 || slot >= static_cast<int>(particles_.size()) || particles_[slot] != static_cast<int>(s))
        return "particle index disagrees with occupancy at site " + std::to_string(s);
    }
    if (count != particles_.size()) return "particle index has wrong length";
    return {};
  }

  /// Equality of the physical state (occupancies and angles); slot order is ignored.
  friend bool operator==(const Configuration& a, const Configuration& b) {
    return a.geom_ == b.geom_ && a.occ_ == b.occ_ && a.angle_ == b.angle_;
  }

 private:
  void check_site(int site) const {
    if (site < 0 || static_cast<std::size_t>(site) >= occ_.size())
      throw std::out_of_range("site index " + std::to_string(site) + " out of range");
  }

  TorusGeometry geom_;
  std::vector<std::uint8_t> occ_;
  std::vector<double> angle_;
  std::vector<int> slot_;
  std::vector<int> particles_;
};

inline Configuration swapped(Configuration c, int x, int y) {
  c.exchange(x, y);
  return c;
}

inline Configuration with_angle(Configuration c, int site, double theta) {
  c.set_angle(site, theta);
  return c;
}

/// (tau_shift eta)_y = eta_{shift + y}.
inline Configuration translated(const Configuration& c, Site shift) {
  const auto& g = c.geometry();
  Configuration out(g);
  for (int y = 0; y < static_cast<int>(g.site_count()); ++y) {
    const int src = g.shifted(y, shift);
    if (c.occupied(src)) out.place(y, c.angle(src));
  }
  return out;
}

}  // namespace aep
