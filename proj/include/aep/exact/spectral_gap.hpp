#pragma once

// Spectral gap of the angle-blind SSEP on the closed box B_n (no wraparound)
// in the K-particle sector, by dense diagonalization.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace aep::exact {

inline constexpr std::size_t kGapStateBudget = 2500;

inline std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

/// -L_n on the K-particle sector of B_n, states ordered by increasing bitmask.
inline Eigen::MatrixXd closed_box_generator(int n, int K) {
  const int side = 2 * n + 1, V = side * side;
  if (n < 1 || K <= 0 || K >= V) throw std::invalid_argument("spectral gap needs n >= 1 and 0 < K < |B_n|");
  const std::size_t count = binomial(V, K);
  if (count > kGapStateBudget)
    throw std::invalid_argument("sector of " + std::to_string(count) + " states exceeds the budget of " +
                                std::to_string(kGapStateBudget));
  std::vector<std::uint32_t> states;
  states.reserve(count);
  for (std::uint32_t s = (1u << K) - 1; s < (1u << V);) {
    states.push_back(s);
    const std::uint32_t c = s & -s, r = s + c;
    s = (((r ^ s) >> 2) / c) | r;  // next mask with the same popcount
  }
  std::vector<std::pair<int, int>> bonds;
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      if (x + 1 < side) bonds.push_back({x + side * y, x + 1 + side * y});
      if (y + 1 < side) bonds.push_back({x + side * y, x + side * (y + 1)});
    }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t s = states[i];
    for (auto [a, b] : bonds) {
      if (((s >> a) & 1u) == ((s >> b) & 1u)) continue;
      const std::uint32_t t = s ^ (1u << a) ^ (1u << b);
      const auto j = static_cast<Eigen::Index>(std::lower_bound(states.begin(), states.end(), t) - states.begin());
      A(static_cast<Eigen::Index>(i), j) -= 1.0;
      A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += 1.0;
    }
  }
  return A;
}

/// Second-smallest eigenvalue of -L_n on the K-particle sector.
inline double spectral_gap_blind(int n, int K) {
  const Eigen::MatrixXd A = closed_box_generator(n, K);
  if (A.rows() < 2) throw std::invalid_argument("sector has a single state");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[1];
}

/// Oracle: spectral gap of the graph Laplacian of the side x side grid,
/// which is the K = 1 sector. Equals 2 - 2 cos(pi / side).
inline double grid_laplacian_gap(int side) {
  const int V = side * side;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(V, V);
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      const int s = x + side * y;
      if (x + 1 < side) {
        A(s, s + 1) -= 1;
        A(s + 1, s) -= 1;
        A(s, s) += 1;
        A(s + 1, s + 1) += 1;
      }
      if (y + 1 < side) {
        A(s, s + side) -= 1;
        A(s + side, s) -= 1;
        A(s, s) += 1;
        A(s + side, s + side) += 1;
      }
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[1];
}

}  // namespace aep::exact
