#pragma once

// Default exact-algebra suite: generator identities on small two-type tori.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "aep/exact/checks.hpp"
#include "aep/exact/ensembles.hpp"
#include "aep/exact/frozen.hpp"
#include "aep/exact/irreducibility.hpp"
#include "aep/exact/spectral_gap.hpp"
#include "aep/rng.hpp"

namespace aep::exact {

struct TorusShape {
  int n1, n2;
};

/// n1 sites along e_1, n2 along e_2. Chains run along e_1 so the two-type
/// drift is felt; sides of length <= 2 along e_1 make L^WA vanish (the +e_1
/// and -e_1 jumps coincide), so 3 x 1 and longer carry the drift checks.
inline const std::vector<TorusShape>& default_shapes() {
  static const std::vector<TorusShape> shapes{{2, 1}, {3, 1}, {4, 1}, {5, 1}, {1, 5}, {2, 2}, {3, 2}};
  return shapes;
}

inline std::string shape_name(const TorusShape& s) { return std::to_string(s.n1) + "x" + std::to_string(s.n2); }

/// Row sums, self-adjointness, current decomposition, adjoint identity and
/// stationarity on every default shape. Tolerance 1e-12 throughout.
inline std::vector<Verdict> algebra_suite(std::uint64_t seed = 7, double tol = 1e-12) {
  std::vector<Verdict> out;
  Rng rng = make_stream(seed, "exactcheck");
  for (const auto& sh : default_shapes()) {
    const std::string tag = shape_name(sh);
    const TinyModel m(sh.n1, sh.n2, 1.0, 0.7, 3.0);
    const Generators g = build_generators(m);
    out.push_back(bound_verdict("row_sums/" + tag,
                                std::max({max_row_sum(g.symmetric), max_row_sum(g.weak_asym), max_row_sum(g.glauber),
                                          max_row_sum(g.full)}),
                                tol));
    double sa = 0.0;
    for (int r = 0; r < 3; ++r) {
      const double a = 0.9 * uniform01(rng), b = (1.0 - a) * uniform01(rng);
      sa = std::max(sa, self_adjointness_defect(g.symmetric, product_weights(m, a, b)));
    }
    out.push_back(bound_verdict("symmetric_self_adjoint/" + tag, sa, tol));
    const double omega[3] = {0.0, uniform01(rng) * 2 - 1, uniform01(rng) * 2 - 1};
    out.push_back(bound_verdict("current_decomposition/" + tag, current_decomposition_defect(m, g.symmetric, omega), tol));
    double adj = 0.0, plus = 1e300;
    for (int r = 0; r < 5; ++r) {
      const double alpha = 0.05 + 0.9 * uniform01(rng);
      const auto d = adjoint_check(m, alpha);
      adj = std::max(adj, d.derived);
      plus = std::min(plus, d.plus_sign);
    }
    out.push_back(bound_verdict("weak_asymmetric_adjoint/" + tag, adj, tol,
                                "L^WA* = -L^WA - 2 sum tau_x j^{lambda_i}_i at 5 random alpha"));
    const bool drift_felt = sh.n1 >= 3;
    Verdict neg{"weak_asymmetric_adjoint_plus_sign_rejected/" + tag, plus, tol, drift_felt ? plus > 1e-6 : plus <= tol,
                drift_felt ? "the +2 sign leaves a defect of 4 |sum tau_x j| (negative control)" : "L^WA vanishes on this shape"};
    out.push_back(neg);
    const TinyModel still(sh.n1, sh.n2, 0.0, 0.0, 3.0);
    out.push_back(bound_verdict("stationarity/" + tag, stationarity_residual(still, 0.6), tol, "lambda = beta = 0, alpha = 0.6"));
  }
  // Negative controls: drift or alignment break invariance of mu*_alpha.
  {
    const TinyModel drift(3, 2, 1.0, 0.0, 3.0), align(3, 2, 0.0, 0.8, 3.0);
    const double rd = stationarity_residual(drift, 0.6), ra = stationarity_residual(align, 0.6);
    out.push_back({"stationarity_broken_by_drift/3x2", rd, tol, rd > 1e-6, "negative control"});
    out.push_back({"stationarity_broken_by_alignment/3x2", ra, tol, ra > 1e-6, "negative control"});
  }
  out.push_back(bound_verdict("single_site_glauber", single_site_glauber_defect(0.9), tol));
  return out;
}

/// Both Dirichlet-form formulas on random h and product weights, and the
/// kernel of the form against the jump sectors.
inline std::vector<Verdict> dirichlet_suite(std::uint64_t seed = 11, double tol = 1e-12) {
  std::vector<Verdict> out;
  Rng rng = make_stream(seed, "dirichlet");
  for (const TorusShape sh : {TorusShape{2, 2}, TorusShape{3, 1}, TorusShape{3, 2}}) {
    const std::string tag = shape_name(sh);
    const TinyModel m(sh.n1, sh.n2);
    const Generators g = build_generators(m);
    double defect = 0.0, most_negative = 0.0;
    for (int r = 0; r < 3; ++r) {
      const double a = 0.9 * uniform01(rng), b = (1.0 - a) * uniform01(rng);
      const Vector w = product_weights(m, a, b);
      const Vector h = state_function(m, [&](std::size_t) { return standard_normal(rng); });
      const double d1 = dirichlet_form_generator(g.symmetric, w, h), d2 = dirichlet_form_gradient(m, w, h);
      defect = std::max(defect, std::abs(d1 - d2));
      most_negative = std::min({most_negative, d1, d2});
    }
    out.push_back(bound_verdict("dirichlet_two_formulas/" + tag, defect, tol));
    out.push_back(bound_verdict("dirichlet_nonnegative/" + tag, -most_negative, 0.0));
    const Vector w = product_weights(m, 0.3, 0.25);
    const Vector one = Vector::Ones(static_cast<Eigen::Index>(m.states()));
    out.push_back(bound_verdict("dirichlet_constant_zero/" + tag, std::abs(dirichlet_form_generator(g.symmetric, w, one)), tol));
    const KernelReport k = dirichlet_kernel(m, w);
    out.push_back({"dirichlet_kernel_is_sector_constants/" + tag, k.max_sector_variation, 1e-8,
                   k.kernel_dimension == k.sectors && k.max_sector_variation <= 1e-8,
                   std::to_string(k.kernel_dimension) + " kernel vectors, " + std::to_string(k.sectors) + " sectors"});
  }
  return out;
}

struct GapRow {
  int n, K;
  double gap;
};

inline std::vector<GapRow> gap_table() {
  std::vector<GapRow> rows;
  for (int K = 1; K <= 8; ++K) rows.push_back({1, K, spectral_gap_blind(1, K)});
  for (int K : {1, 2, 3, 22, 23, 24}) rows.push_back({2, K, spectral_gap_blind(2, K)});
  return rows;
}

inline std::vector<Verdict> gap_suite(const std::vector<GapRow>& rows) {
  std::vector<Verdict> out;
  std::map<std::pair<int, int>, double> gap;
  double smallest = 1e300;
  for (const auto& r : rows) {
    gap[{r.n, r.K}] = r.gap;
    smallest = std::min(smallest, r.gap);
  }
  out.push_back({"gap_positive", smallest, 0.0, smallest > 1e-9, "smallest gap over all tested (n, K)"});
  double sym = 0.0;
  for (int K = 1; K <= 8; ++K) sym = std::max(sym, std::abs(gap[{1, K}] - gap[{1, 9 - K}]));
  out.push_back(bound_verdict("gap_particle_hole_symmetric/n=1", sym, 1e-10));
  out.push_back(bound_verdict("gap_single_particle_is_grid_laplacian", std::abs(gap[{1, 1}] - grid_laplacian_gap(3)), 1e-12));
  double outside = 0.0;
  std::string where;
  for (const auto& r : rows) {
    const double scaled = r.gap * r.n * r.n;
    const double miss = std::max({0.0, kGapBracket[0] - scaled, scaled - kGapBracket[1]});
    if (miss > outside) {
      outside = miss;
      where = "n=" + std::to_string(r.n) + " K=" + std::to_string(r.K);
    }
  }
  out.push_back({"gap_times_n2_in_frozen_bracket", outside, 0.0, outside == 0.0,
                 "bracket [" + std::to_string(kGapBracket[0]) + ", " + std::to_string(kGapBracket[1]) + "] " + where});
  return out;
}

/// Random pair of configurations of B_p with the same angle multiset
/// (labels 1..types) and at least two holes.
inline std::pair<BoxConfig, BoxConfig> random_box_pair(int p, int types, Rng& rng) {
  const int side = 2 * p + 1, V = side * side;
  const int K = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(V - 1)));  // 0 .. V - 2
  std::vector<int> items(V, 0);
  for (int k = 0; k < K; ++k) items[k] = 1 + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(types)));
  auto shuffled = [&](std::vector<int> v) {
    for (int i = V - 1; i > 0; --i) std::swap(v[i], v[uniform_index(rng, static_cast<std::uint64_t>(i + 1))]);
    return BoxConfig{side, v};
  };
  BoxConfig a = shuffled(items);
  BoxConfig b = shuffled(items);
  return {a, b};
}

struct IrreducibilityStats {
  std::size_t pairs = 0;
  std::size_t invalid = 0;
  std::size_t max_length = 0;
  std::size_t bfs_checked = 0;
  std::size_t bfs_failures = 0;  // unreachable, or path shorter than the geodesic
  std::string first_error;
};

inline IrreducibilityStats irreducibility_run(int p, std::size_t pairs, int types, std::uint64_t seed, bool with_bfs) {
  IrreducibilityStats st;
  Rng rng = make_stream(seed, "irreducibility", static_cast<std::uint64_t>(p));
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto [a, b] = random_box_pair(p, types, rng);
    const auto path = irreducibility_path(a, b);
    ++st.pairs;
    st.max_length = std::max(st.max_length, path.size());
    if (auto err = replay(a, path, b)) {
      ++st.invalid;
      if (st.first_error.empty()) st.first_error = *err;
    }
    if (with_bfs) {
      ++st.bfs_checked;
      const long d = bfs_distance(a, b);
      if (d < 0 || static_cast<long>(path.size()) < d) ++st.bfs_failures;
    }
  }
  return st;
}

inline std::vector<Verdict> irreducibility_suite(std::uint64_t seed = 13, std::size_t pairs = 1000) {
  std::vector<Verdict> out;
  const IrreducibilityStats b2 = irreducibility_run(2, pairs, 2, seed, false);
  out.push_back({"irreducibility_paths_valid/B2", static_cast<double>(b2.invalid), 0.0, b2.invalid == 0,
                 std::to_string(b2.pairs) + " pairs replayed" + (b2.first_error.empty() ? "" : "; " + b2.first_error)});
  const double bound = kIrreducibilityConstant * 16.0;
  out.push_back({"irreducibility_length_bound/B2", static_cast<double>(b2.max_length), bound, b2.max_length <= bound,
                 "max length against C p^4 with the frozen C = " + std::to_string(kIrreducibilityConstant)});
  const IrreducibilityStats b1 = irreducibility_run(1, pairs, 2, seed, true);
  out.push_back({"irreducibility_bfs_oracle/B1", static_cast<double>(b1.bfs_failures + b1.invalid), 0.0,
                 b1.bfs_failures == 0 && b1.invalid == 0,
                 std::to_string(b1.bfs_checked) + " pairs: BFS reaches the target and no path beats the geodesic"});
  {
    // One adjacent transposition in the middle of B_2 with the holes in two corners.
    BoxConfig a{5, std::vector<int>(25, 1)};
    a.cell[0] = a.cell[24] = 0;
    a.cell[12] = 2;
    BoxConfig b = a;
    std::swap(b.cell[12], b.cell[13]);
    const auto path = irreducibility_path(a, b);
    const bool ok = !replay(a, path, b).has_value();
    out.push_back({"irreducibility_single_transposition/B2", static_cast<double>(path.size()), bound, ok && path.size() <= bound,
                   "path length for one transposition with far holes"});
  }
  {
    BoxConfig a{5, std::vector<int>(25, 1)};
    a.cell[0] = 0;
    bool refused = false;
    try {
      irreducibility_path(a, a);
    } catch (const std::invalid_argument&) {
      refused = true;
    }
    out.push_back({"irreducibility_refuses_one_hole", refused ? 0.0 : 1.0, 0.0, refused, ""});
  }
  return out;
}

struct EnsembleRow {
  GapEstimate est;
  double z = 0.0;  // (gap - formula) / stderr
};

inline std::vector<EnsembleRow> ensemble_table(std::size_t samples = 400000, std::uint64_t seed = 17) {
  std::vector<EnsembleRow> rows;
  for (int l : {2, 4, 8, 16}) {
    const long V = static_cast<long>(2 * l + 1) * (2 * l + 1);
    EnsembleRow r{canonical_pair_mc(l, V / 2, samples, seed), 0.0};
    r.z = (r.est.gap - r.est.formula) / r.est.stderr_;
    rows.push_back(r);
  }
  return rows;
}

inline std::vector<Verdict> ensemble_suite(const std::vector<EnsembleRow>& rows) {
  std::vector<Verdict> out;
  std::vector<double> ls, gaps;
  double worst = 0.0;
  for (const auto& r : rows) {
    worst = std::max(worst, std::abs(r.z));
    ls.push_back(r.est.l);
    gaps.push_back(r.est.gap);
  }
  out.push_back(bound_verdict("ensemble_gap_matches_formula", worst, 4.0, "max |z| over l in {2, 4, 8, 16}"));
  bool positive = true;
  for (double g : gaps) positive = positive && g > 0.0;
  const double slope = positive ? loglog_slope(ls, gaps) : 0.0;
  out.push_back({"ensemble_gap_loglog_slope", std::abs(slope + 2.0), 0.3, positive && std::abs(slope + 2.0) <= 0.3,
                 "slope " + std::to_string(slope)});
  return out;
}

}  // namespace aep::exact
