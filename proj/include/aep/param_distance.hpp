#pragma once

// Dual-norm distance on grand-canonical parameters:
//   d(a, b) = sup { int g d(a - b) : ||g||_inf <= 1, ||g'||_inf <= 1 }.
// The supremum is taken over periodic piecewise-linear g on an M-node grid,
// which is solved exactly as a small linear program by dynamic programming.
// Piecewise-linear functions with slope <= 1 are limits of admissible C^1
// functions, so the value is a lower bound that converges as M grows. It is
// a seminorm in (a - b) for every M: symmetric and subadditive.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "aep/angle_measure.hpp"

namespace aep {

namespace detail {

/// Node weights of a measure for piecewise-linear test functions on the grid.
inline void accumulate_node_weights(const AngleMeasure& m, double sign, std::vector<double>& w) {
  const int nodes = static_cast<int>(w.size());
  const double h = kTwoPi / nodes;
  auto spread = [&](double theta, double weight) {
    const double pos = wrap_angle(theta) / h;
    int k0 = static_cast<int>(std::floor(pos));
    const double frac = pos - k0;
    k0 %= nodes;
    w[k0] += sign * weight * (1.0 - frac);
    w[(k0 + 1) % nodes] += sign * weight * frac;
  };
  for (const auto& a : m.atoms()) spread(a.angle, a.weight);
  if (m.is_histogram()) {
    constexpr int kSub = 64;
    const auto& bins = m.histogram_bins();
    const auto& hist = m.histogram_weights();
    for (int k = 0; k < bins.count(); ++k) {
      if (hist[k] == 0.0) continue;
      for (int q = 0; q < kSub; ++q) spread(bins.lower_edge(k) + bins.width() * (q + 0.5) / kSub, hist[k] / kSub);
    }
  }
}

/// max sum_k w_k g_k subject to |g_k| <= 1, |g_{k+1} - g_k| <= h (cyclic).
/// Optimal vertices have values +-1 -+ m h, so the search runs over those levels.
inline double max_lipschitz_pairing(const std::vector<double>& w) {
  const int nodes = static_cast<int>(w.size());
  const double h = kTwoPi / nodes;
  std::vector<double> levels;
  for (int m = 0; 1.0 - m * h >= -1.0 - 1e-15; ++m) {
    levels.push_back(1.0 - m * h);
    levels.push_back(-1.0 + m * h);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               levels.end());
  const int nl = static_cast<int>(levels.size());
  const double tol = h * (1.0 + 1e-12);

  // Neighbor windows in the sorted level list.
  std::vector<int> lo(nl), hi(nl);
  for (int i = 0; i < nl; ++i) {
    int a = i, b = i;
    while (a > 0 && levels[i] - levels[a - 1] <= tol) --a;
    while (b + 1 < nl && levels[b + 1] - levels[i] <= tol) ++b;
    lo[i] = a;
    hi[i] = b;
  }

  constexpr double kNeg = -std::numeric_limits<double>::infinity();
  double best = 0.0;
  std::vector<double> cur(nl), next(nl);
  for (int start = 0; start < nl; ++start) {
    std::fill(cur.begin(), cur.end(), kNeg);
    cur[start] = w[0] * levels[start];
    for (int k = 1; k < nodes; ++k) {
      for (int i = 0; i < nl; ++i) {
        double m = kNeg;
        for (int j = lo[i]; j <= hi[i]; ++j) m = std::max(m, cur[j]);
        next[i] = m == kNeg ? kNeg : m + w[k] * levels[i];
      }
      std::swap(cur, next);
    }
    for (int i = lo[start]; i <= hi[start]; ++i) best = std::max(best, cur[i]);
  }
  return best;
}

}  // namespace detail

/// Lower bound of the dual-norm distance computed on `resolution` grid nodes.
inline double param_distance(const AngleMeasure& a, const AngleMeasure& b, int resolution = 64) {
  if (resolution < 3) throw std::invalid_argument("param_distance needs at least 3 grid nodes");
  std::vector<double> w(resolution, 0.0);
  detail::accumulate_node_weights(a, +1.0, w);
  detail::accumulate_node_weights(b, -1.0, w);
  return detail::max_lipschitz_pairing(w);
}

inline double param_norm(const AngleMeasure& a, int resolution = 64) {
  return param_distance(a, AngleMeasure::zero(), resolution);
}

}  // namespace aep
