#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aep {

struct Site {
  int x = 0;
  int y = 0;
  friend bool operator==(const Site&, const Site&) = default;
};

/// Periodic N x N lattice. Sites are numbered x + N*y.
class TorusGeometry {
 public:
  explicit TorusGeometry(int side) : side_(side) {
    if (side < 1) throw std::invalid_argument("torus side must be positive, got " + std::to_string(side));
  }

  int side() const noexcept { return side_; }
  std::size_t site_count() const noexcept { return static_cast<std::size_t>(side_) * side_; }

  int wrap(int v) const noexcept {
    const int r = v % side_;
    return r < 0 ? r + side_ : r;
  }

  int index(int x, int y) const noexcept { return wrap(x) + side_ * wrap(y); }
  int index(Site s) const noexcept { return index(s.x, s.y); }

  Site coords(int site) const noexcept { return {site % side_, site / side_}; }

  /// Neighbor along `axis` (0 or 1) in direction `dir` (+1 or -1).
  int neighbor(int site, int axis, int dir) const noexcept {
    const Site s = coords(site);
    return axis == 0 ? index(s.x + dir, s.y) : index(s.x, s.y + dir);
  }

  int shifted(int site, Site by) const noexcept {
    const Site s = coords(site);
    return index(s.x + by.x, s.y + by.y);
  }

  friend bool operator==(const TorusGeometry&, const TorusGeometry&) = default;

 private:
  int side_;
};

/// The box B_l(center) = { y : |y - center|_inf <= l } on the torus.
struct Box {
  Site center{};
  int half_width = 0;

  int side() const noexcept { return 2 * half_width + 1; }
  std::size_t volume() const noexcept { return static_cast<std::size_t>(side()) * side(); }
};

/// Sites of a box in row-major order, wrapped onto the torus.
template <class Fn>
void for_each_box_site(const TorusGeometry& geom, const Box& box, Fn&& fn) {
  if (box.half_width < 0 || box.side() > geom.side())
    throw std::invalid_argument("box of half-width " + std::to_string(box.half_width) +
                                " does not fit in torus of side " + std::to_string(geom.side()));
  for (int dy = -box.half_width; dy <= box.half_width; ++dy)
    for (int dx = -box.half_width; dx <= box.half_width; ++dx)
      fn(geom.index(box.center.x + dx, box.center.y + dy));
}

}  // namespace aep
