#pragma once

// Canonical versus grand-canonical expectations on the box B_l.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "aep/rng.hpp"

namespace aep::exact {

/// E_{l,K}(eta_0 eta_{e_1}) = K (K - 1) / (|B| (|B| - 1)) (sampling without replacement).
inline double canonical_pair(long K, long V) { return static_cast<double>(K) * (K - 1) / (static_cast<double>(V) * (V - 1)); }

/// E_{alpha_K}(eta_0 eta_{e_1}) = (K / |B|)^2.
inline double grand_canonical_pair(long K, long V) {
  const double a = static_cast<double>(K) / V;
  return a * a;
}

/// |canonical - grand canonical| = K (|B| - K) / (|B|^2 (|B| - 1)).
inline double pair_gap_formula(long K, long V) {
  return static_cast<double>(K) * (V - K) / (static_cast<double>(V) * V * (V - 1));
}

struct GapEstimate {
  int l = 0;
  long K = 0;
  long volume = 0;
  double canonical = 0.0;  // Monte Carlo
  double stderr_ = 0.0;
  double gap = 0.0;        // grand canonical - canonical (Monte Carlo)
  double formula = 0.0;
};

/// Monte Carlo canonical expectation of eta_0 eta_{e_1}: K particles placed
/// uniformly on the closed box B_l, averaged over every horizontal bond of
/// the box (all bonds have the same law by exchangeability).
inline GapEstimate canonical_pair_mc(int l, long K, std::size_t samples, std::uint64_t seed) {
  const int side = 2 * l + 1;
  const long V = static_cast<long>(side) * side;
  Rng rng = make_stream(seed, "canonical-sampler", static_cast<std::uint64_t>(l));
  std::vector<int> sites(V);
  std::vector<unsigned char> occ(V);
  double s1 = 0.0, s2 = 0.0;
  const double bonds = static_cast<double>(side - 1) * side;
  for (std::size_t n = 0; n < samples; ++n) {
    for (long i = 0; i < V; ++i) sites[i] = static_cast<int>(i);
    std::fill(occ.begin(), occ.end(), 0);
    for (long k = 0; k < K; ++k) {
      const long j = k + static_cast<long>(uniform_index(rng, static_cast<std::uint64_t>(V - k)));
      std::swap(sites[k], sites[j]);
      occ[sites[k]] = 1;
    }
    long pairs = 0;
    for (int y = 0; y < side; ++y)
      for (int x = 0; x + 1 < side; ++x) pairs += occ[x + side * y] & occ[x + 1 + side * y];
    const double v = pairs / bonds;
    s1 += v;
    s2 += v * v;
  }
  GapEstimate g;
  g.l = l;
  g.K = K;
  g.volume = V;
  g.canonical = s1 / samples;
  g.stderr_ = std::sqrt(std::max(0.0, s2 / samples - g.canonical * g.canonical) / (samples - 1));
  g.gap = grand_canonical_pair(K, V) - g.canonical;
  g.formula = pair_gap_formula(K, V);
  return g;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace aep::exact
