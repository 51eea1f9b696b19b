#pragma once

// Measurement layer: block-averaged empirical fields, full clusters,
// magnetization and tracer displacement.

#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aep/angles.hpp"
#include "aep/configuration.hpp"
#include "aep/dynamics.hpp"

namespace aep {

/// Coarse-grained empirical measure on a grid x grid array of disjoint blocks.
/// Cell (cx, cy) has index cx + grid * cy and covers the sites
/// [cx * block, (cx + 1) * block) x [cy * block, (cy + 1) * block).
struct FieldSnapshot {
  double time = 0.0;
  int N = 0;
  int grid = 0;
  int block = 0;
  double epsilon = 0.0;
  AngleBins bins{1};
  std::vector<double> mass;   // per cell; equals the bin sum of `hist`
  std::vector<double> hist;   // per cell and bin, index cell * M + k
  std::vector<double> mag_x;  // block average of eta cos(theta)
  std::vector<double> mag_y;  // block average of eta sin(theta)

  std::size_t cells() const noexcept { return static_cast<std::size_t>(grid) * grid; }
  double cell_area() const noexcept { return 1.0 / (static_cast<double>(grid) * grid); }
  double& bin(std::size_t cell, int k) { return hist[cell * bins.count() + k]; }
  double bin(std::size_t cell, int k) const { return hist[cell * bins.count() + k]; }

  void allocate() {
    mass.assign(cells(), 0.0);
    hist.assign(cells() * bins.count(), 0.0);
    mag_x.assign(cells(), 0.0);
    mag_y.assign(cells(), 0.0);
  }

  /// mass := sum of the bins, in bin order.
  void recompute_mass() {
    for (std::size_t c = 0; c < cells(); ++c) {
      double s = 0.0;
      for (int k = 0; k < bins.count(); ++k) s += bin(c, k);
      mass[c] = s;
    }
  }
};

inline FieldSnapshot block_field(const Configuration& c, int block, int grid, const AngleBins& bins, double time = 0.0) {
  if (block < 1 || grid < 1 || block * grid > c.side())
    throw std::invalid_argument("block field of " + std::to_string(grid) + " cells of side " + std::to_string(block) +
                                " does not fit a torus of side " + std::to_string(c.side()));
  FieldSnapshot f;
  f.time = time;
  f.N = c.side();
  f.grid = grid;
  f.block = block;
  f.bins = bins;
  f.allocate();
  const double inv = 1.0 / (static_cast<double>(block) * block);
  std::vector<long> counts(f.hist.size(), 0);
  for (int s : c.particles()) {
    const Site p = c.geometry().coords(s);
    const int cx = p.x / block, cy = p.y / block;
    if (cx >= grid || cy >= grid) continue;
    const std::size_t cell = static_cast<std::size_t>(cx) + static_cast<std::size_t>(grid) * cy;
    ++counts[cell * bins.count() + bins.index_of(c.angle(s))];
    f.mag_x[cell] += std::cos(c.angle(s));
    f.mag_y[cell] += std::sin(c.angle(s));
  }
  for (std::size_t i = 0; i < counts.size(); ++i) f.hist[i] = counts[i] * inv;
  for (std::size_t cell = 0; cell < f.cells(); ++cell) {
    f.mag_x[cell] *= inv;
    f.mag_y[cell] *= inv;
  }
  f.recompute_mass();
  return f;
}

/// Block averages over B_{eps N}: blocks of side 2 floor(eps N) + 1, grid N / side.
inline FieldSnapshot mollified_density(const Configuration& c, double epsilon, const AngleBins& bins, double time = 0.0) {
  const double scaled = epsilon * c.side();
  if (scaled < 1.0 || scaled > c.side() / 2.0)
    throw std::invalid_argument("mollifier needs 1 <= eps N <= N/2, got eps N = " + std::to_string(scaled));
  const int l = static_cast<int>(std::floor(scaled + 1e-12));
  const int block = 2 * l + 1;
  FieldSnapshot f = block_field(c, block, c.side() / block, bins, time);
  f.epsilon = epsilon;
  return f;
}

/// Exact tiling of the torus by grid x grid blocks (N divisible by grid).
inline FieldSnapshot coarse_field(const Configuration& c, int grid, const AngleBins& bins, double time = 0.0) {
  if (grid < 1 || c.side() % grid != 0)
    throw std::invalid_argument("coarse grid " + std::to_string(grid) + " does not divide N = " + std::to_string(c.side()));
  FieldSnapshot f = block_field(c, c.side() / grid, grid, bins, time);
  f.epsilon = 1.0 / (2.0 * grid);
  return f;
}

/// Sliding-window average <phi>^l_x = |B_l|^{-1} sum_{y in B_l(x)} tau_y phi for phi = eta.
inline double sliding_block_average(const Configuration& c, int l, int site) {
  const Site p = c.geometry().coords(site);
  long count = 0;
  for_each_box_site(c.geometry(), Box{p, l}, [&](int s) { count += c.eta(s); });
  return static_cast<double>(count) / static_cast<double>(Box{p, l}.volume());
}

struct VectorField {
  int grid = 0;
  std::vector<double> x;
  std::vector<double> y;
};

/// Block averages of eta_x (cos theta_x, sin theta_x) on the mollified grid.
inline VectorField magnetization_field(const Configuration& c, double epsilon) {
  const FieldSnapshot f = mollified_density(c, epsilon, AngleBins(1));
  return {f.grid, f.mag_x, f.mag_y};
}

/// Occupation count of B_p(x) for every site, by cyclic window sums.
inline std::vector<int> box_counts(const Configuration& c, int p) {
  const int n = c.side();
  const int w = 2 * p + 1;
  if (p < 0 || w > n) throw std::invalid_argument("box of half-width " + std::to_string(p) + " does not fit the torus");
  std::vector<int> rows(c.site_count()), out(c.site_count());
  for (int y = 0; y < n; ++y) {
    int s = 0;
    for (int dx = -p; dx <= p; ++dx) s += c.eta(c.geometry().index(dx, y));
    for (int x = 0; x < n; ++x) {
      rows[x + n * y] = s;
      s += c.eta(c.geometry().index(x + p + 1, y)) - c.eta(c.geometry().index(x - p, y));
    }
  }
  for (int x = 0; x < n; ++x) {
    int s = 0;
    for (int dy = -p; dy <= p; ++dy) s += rows[c.geometry().index(x, dy)];
    for (int y = 0; y < n; ++y) {
      out[x + n * y] = s;
      s += rows[c.geometry().index(x, y + p + 1)] - rows[c.geometry().index(x, y - p)];
    }
  }
  return out;
}

/// Fraction of sites x whose box B_p(x) holds at least |B_p| - 1 particles.
inline double full_cluster_fraction(const Configuration& c, int p) {
  if (p < 1) throw std::invalid_argument("full_cluster_fraction needs p >= 1");
  const auto counts = box_counts(c, p);
  const int threshold = (2 * p + 1) * (2 * p + 1) - 1;
  long full = 0;
  for (int k : counts) full += k >= threshold;
  return static_cast<double>(full) / static_cast<double>(c.site_count());
}

struct MsdSample {
  double time = 0.0;
  double x2 = 0.0;  // mean of X_1(t)^2 over tags, lattice units
  double y2 = 0.0;
};

/// Squared unwrapped displacement of tagged particles over time.
class MsdTracker {
 public:
  /// Tags every particle present in `sim`.
  explicit MsdTracker(const SimulationState& sim) {
    tags_.resize(sim.config.particle_count());
    std::iota(tags_.begin(), tags_.end(), 0);
  }

  MsdTracker(const SimulationState& sim, std::vector<int> tags) : tags_(std::move(tags)) {
    for (int t : tags_)
      if (t < 0 || static_cast<std::size_t>(t) >= sim.config.particle_count())
        throw std::invalid_argument("tag " + std::to_string(t) + " is not a particle of the simulation");
  }

  const MsdSample& record(const SimulationState& sim) {
    MsdSample s{sim.time, 0.0, 0.0};
    if (sim.displacement.size() != sim.config.particle_count()) throw std::logic_error("tracer tag lost");
    for (int t : tags_) {
      const auto& d = sim.displacement[t];
      s.x2 += static_cast<double>(d.dx) * d.dx;
      s.y2 += static_cast<double>(d.dy) * d.dy;
    }
    if (!tags_.empty()) {
      s.x2 /= tags_.size();
      s.y2 /= tags_.size();
    }
    series_.push_back(s);
    return series_.back();
  }

  const std::vector<MsdSample>& series() const noexcept { return series_; }
  const std::vector<int>& tags() const noexcept { return tags_; }

 private:
  std::vector<int> tags_;
  std::vector<MsdSample> series_;
};

/// Cellwise mean of snapshots sharing one grid.
inline FieldSnapshot average_snapshots(std::span<const FieldSnapshot> snaps) {
  if (snaps.empty()) throw std::invalid_argument("no snapshots to average");
  FieldSnapshot out = snaps.front();
  for (std::size_t r = 1; r < snaps.size(); ++r) {
    const auto& s = snaps[r];
    if (s.grid != out.grid || !(s.bins == out.bins)) throw std::invalid_argument("snapshots live on different grids");
    for (std::size_t i = 0; i < out.hist.size(); ++i) out.hist[i] += s.hist[i];
    for (std::size_t i = 0; i < out.cells(); ++i) {
      out.mag_x[i] += s.mag_x[i];
      out.mag_y[i] += s.mag_y[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(snaps.size());
  for (auto& v : out.hist) v *= inv;
  for (auto& v : out.mag_x) v *= inv;
  for (auto& v : out.mag_y) v *= inv;
  out.recompute_mass();
  return out;
}

/// int |rho-hat_a - rho-hat_b| du summed over angle bins.
inline double l1_distance(const FieldSnapshot& a, const FieldSnapshot& b) {
  if (a.grid != b.grid || !(a.bins == b.bins)) throw std::invalid_argument("l1_distance: grid mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.hist.size(); ++i) s += std::abs(a.hist[i] - b.hist[i]);
  return s * a.cell_area();
}

}  // namespace aep
