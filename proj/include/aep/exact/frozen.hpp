#pragma once

// Constants frozen from the calibration runs of the exact suite.

#include <array>

namespace aep::exact {

/// Path length bound C p^4 of the irreducibility construction. The length
/// distribution has a long tail: the longest path over 500 seeds x 1000
/// random B_2 pairs was 1868 jumps (C = 116.75) with two or three labels.
/// Frozen with a margin of about 28%.
inline constexpr double kIrreducibilityConstant = 150.0;

/// Bracket for gap * n^2 of the angle-blind SSEP on B_n. Every tested sector
/// has the single-particle gap 2 - 2 cos(pi / (2n + 1)): 1 for n = 1 and
/// 1.5279 for n = 2.
inline constexpr std::array<double, 2> kGapBracket{0.95, 1.6};

}  // namespace aep::exact
