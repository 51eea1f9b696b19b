#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "aep/exact/generators.hpp"
#include "aep/generator.hpp"
#include "aep/glauber.hpp"
#include "aep/martingale.hpp"
#include "aep/exact/ensembles.hpp"
#include "aep/sampling.hpp"
#include "stats.hpp"

namespace aep {
namespace {

ModelParams params(int n, double lambda, double beta, AngleModel m = AngleModel::continuum, std::uint64_t seed = 1) {
  ModelParams p;
  p.N = n;
  p.lambda = lambda;
  p.beta = beta;
  p.angles = m;
  p.seed = seed;
  return p;
}

Configuration random_config(int n, double alpha, Rng& rng) {
  return sample_product_measure(InitialProfile::constant(AngleMeasure::uniform(alpha)), TorusGeometry(n), rng);
}

Configuration random_two_type(int n, Rng& rng) {
  return sample_product_measure(InitialProfile::two_type([](double, double) { return 0.3; }, [](double, double) { return 0.3; }),
                                TorusGeometry(n), rng);
}

TEST(JumpRate, RateTable) {
  Configuration c{TorusGeometry(8)};
  const ModelParams p = params(8, 2.0, 0.0);
  c.place(9, 0.0);
  EXPECT_DOUBLE_EQ(jump_rate(c, 9, 0, +1, p), 64.0 * (1 + 2.0 / 8));
  EXPECT_DOUBLE_EQ(jump_rate(c, 9, 0, -1, p), 64.0 * (1 - 2.0 / 8));
  c.set_angle(9, kPi / 2);
  EXPECT_NEAR(jump_rate(c, 9, 0, +1, p), 64.0, 1e-12);
  EXPECT_NEAR(jump_rate(c, 9, 0, -1, p), 64.0, 1e-12);
  c.place(10, 0.0);
  EXPECT_EQ(jump_rate(c, 9, 0, +1, p), 0.0);
}

TEST(JumpRate, SymmetricWithoutDrift) {
  Rng rng = make_stream(3, "rates");
  const ModelParams p = params(6, 0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    Configuration c = random_config(6, 0.5, rng);
    for (int x : std::vector<int>(c.particles().begin(), c.particles().end()))
      for (int axis = 0; axis < 2; ++axis)
        for (int dir = -1; dir <= 1; dir += 2) {
          const int y = c.geometry().neighbor(x, axis, dir);
          if (c.occupied(y)) continue;
          const double forward = jump_rate(c, x, axis, dir, p);
          const Configuration d = swapped(c, x, y);
          EXPECT_DOUBLE_EQ(forward, jump_rate(d, y, axis, -dir, p));
        }
  }
}

TEST(Glauber, DensityNormalizationAndMode) {
  Configuration empty{TorusGeometry(5)};
  empty.place(12, 0.0);
  for (double th : {0.0, 1.0, 4.0}) EXPECT_DOUBLE_EQ(glauber_density(empty, 12, th, 3.0), 1.0 / kTwoPi);

  Rng rng = make_stream(8, "glauber-sets");
  const int Q = 1 << 14;
  for (int t = 0; t < 100; ++t) {
    Configuration c{TorusGeometry(5)};
    c.place(12, 0.0);
    for (int s : {7, 11, 13, 17})
      if (uniform01(rng) < 0.7) c.place(s, kTwoPi * uniform01(rng));
    const double beta = 3.0 * uniform01(rng);
    double integral = 0.0, best = -1.0, argmax = 0.0;
    for (int q = 0; q < Q; ++q) {
      const double th = kTwoPi * q / Q, v = glauber_density(c, 12, th, beta);
      integral += v;
      if (v > best) best = v, argmax = th;
    }
    EXPECT_NEAR(integral * kTwoPi / Q, 1.0, 1e-10);
    const Resultant r = neighbor_resultant(c, 12);
    if (r.norm() > 1e-6 && beta > 0.0) EXPECT_LE(std::abs(angle_difference(argmax, r.direction())), kTwoPi / Q);
  }
}

TEST(Glauber, OneNeighbourIsVonMises) {
  Configuration c{TorusGeometry(5)};
  c.place(12, 2.0);
  c.place(13, 0.0);
  for (double th : {0.0, 0.5, 3.0, 5.5})
    EXPECT_NEAR(glauber_density(c, 12, th, 1.5), std::exp(1.5 * std::cos(th)) / (kTwoPi * std::cyl_bessel_i(0.0, 1.5)), 1e-13);
}

TEST(Glauber, UniformWhenBetaZero) {
  Configuration c{TorusGeometry(5)};
  c.place(12, 0.0);
  c.place(13, 1.0);
  Rng rng = make_stream(1, "ks");
  std::vector<double> x(100000);
  for (auto& v : x) v = sample_glauber_angle(c, 12, 0.0, rng);
  EXPECT_LT(testing::ks_statistic(x, [](double t) { return t / kTwoPi; }), testing::kKs1Percent);
}

TEST(Glauber, CircularMeanOfAlignedNeighbours) {
  Configuration c{TorusGeometry(5)};
  c.place(12, 0.0);
  for (int s : {7, 11, 13, 17}) c.place(s, kPi / 3);
  Rng rng = make_stream(2, "mean");
  const int n = 100000;
  double sx = 0, sy = 0, sx2 = 0, sy2 = 0;
  for (int i = 0; i < n; ++i) {
    const double t = sample_glauber_angle(c, 12, 2.0, rng);
    // component orthogonal to pi/3 has mean zero by symmetry
    const double v = std::sin(t - kPi / 3);
    sx += v;
    sx2 += v * v;
    sy += std::cos(t - kPi / 3);
    sy2 += 1;
  }
  EXPECT_LT(std::abs(sx / n), 3 * std::sqrt(sx2 / n / n));
  EXPECT_GT(sy / n, 0.9);
}

TEST(Glauber, ChiSquareAgainstDensity) {
  Rng rng = make_stream(4, "chi2");
  for (double beta : {0.0, 0.5, 2.0}) {
    Configuration c{TorusGeometry(5)};
    c.place(12, 0.0);
    c.place(7, 0.4);
    c.place(11, 2.0);
    c.place(17, 5.0);
    const int bins = 32, n = 100000;
    std::vector<double> obs(bins, 0.0), prob(bins, 0.0);
    for (int i = 0; i < n; ++i) obs[std::min(bins - 1, static_cast<int>(sample_glauber_angle(c, 12, beta, rng) / kTwoPi * bins))] += 1;
    for (int k = 0; k < bins; ++k)
      for (int q = 0; q < 64; ++q) prob[k] += glauber_density(c, 12, kTwoPi * (k + (q + 0.5) / 64) / bins, beta) * kTwoPi / bins / 64;
    EXPECT_GT(testing::chi2_pvalue(obs, prob), 0.01) << "beta " << beta;
  }
}

TEST(Advance, EmptyLatticeOnlyAdvancesTime) {
  SimulationState sim = make_simulation(params(8, 1.0, 1.0), Configuration{TorusGeometry(8)});
  const auto r = advance(sim, 3.0);
  EXPECT_EQ(r.events, 0u);
  EXPECT_EQ(sim.time, 3.0);
  EXPECT_EQ(sim.config.particle_count(), 0u);
}

TEST(Advance, ConservesParticlesAndExclusion) {
  Rng rng = make_stream(5, "cons");
  SimulationState sim = make_simulation(params(16, 3.0, 1.0), random_config(16, 0.6, rng));
  const auto k = sim.config.particle_count();
  for (int i = 0; i < 20; ++i) {
    advance(sim, 0.002);
    ASSERT_EQ(sim.config.particle_count(), k);
    ASSERT_TRUE(sim.config.invariant_violation().empty());
  }
}

TEST(Advance, FreeParticleDisplacementVariance) {
  const int n = 16, R = 10000;
  const double t = 0.05;  // 2 N^2 t = 25.6 per coordinate
  double sx = 0.0, sy = 0.0;
  for (int r = 0; r < R; ++r) {
    Configuration c{TorusGeometry(n)};
    c.place(0, 0.0);
    SimulationState sim = make_simulation(params(n, 0.0, 0.0), std::move(c), r);
    advance(sim, t);
    sx += static_cast<double>(sim.displacement[0].dx) * sim.displacement[0].dx;
    sy += static_cast<double>(sim.displacement[0].dy) * sim.displacement[0].dy;
  }
  const double target = 2.0 * n * n * t;
  EXPECT_NEAR(sx / R / target, 1.0, 0.05);
  EXPECT_NEAR(sy / R / target, 1.0, 0.05);
}

TEST(Advance, SameSeedSameTrajectory) {
  Rng rng = make_stream(7, "det");
  const Configuration c = random_config(16, 0.4, rng);
  SimulationState a = make_simulation(params(16, 2.0, 1.0, AngleModel::continuum, 11), c, 3);
  SimulationState b = make_simulation(params(16, 2.0, 1.0, AngleModel::continuum, 11), c, 3);
  advance(a, 0.01);
  advance(b, 0.01);
  EXPECT_EQ(a.config, b.config);
  for (int s : a.config.particles()) EXPECT_EQ(a.config.angle(s), b.config.angle(s));
}

// On the 3 x 3 two-type torus the product measure is stationary for lambda = beta = 0:
// after a long run, each site is plus/minus/empty with the initial marginals.
TEST(Advance, ThreeByThreeStationarity) {
  const int R = 4000;
  std::vector<double> counts(3, 0.0);
  const auto prof = InitialProfile::two_type([](double, double) { return 0.25; }, [](double, double) { return 0.25; });
  for (int r = 0; r < R; ++r) {
    Rng rng = make_stream(9, "site-sampler", r);
    SimulationState sim = make_simulation(params(3, 0.0, 0.0, AngleModel::two_type, 9), sample_product_measure(prof, TorusGeometry(3), rng), r);
    advance(sim, 5.0 / 9.0);  // 5 time units of the unscaled dynamics
    const int v = sim.config.occupied(4) ? (sim.config.angle(4) == 0.0 ? 1 : 2) : 0;
    counts[v] += 1;
  }
  const double p[3] = {0.5, 0.25, 0.25};
  for (int v = 0; v < 3; ++v) EXPECT_NEAR(counts[v] / R, p[v], 4 * std::sqrt(p[v] * (1 - p[v]) / R)) << v;
}

/// Counts sojourn times and transitions between tiny-model states.
struct TransitionRecorder {
  const exact::TinyModel* model;
  std::size_t state = 0;
  std::map<std::size_t, double> time;
  std::map<std::pair<std::size_t, std::size_t>, double> jumps;

  void elapsed(const SimulationState&, double dt) { time[state] += dt; }
  void exchanged(const SimulationState& sim, int, int) { moved(sim); }
  void flipped(const SimulationState& sim, int, double) { moved(sim); }
  void moved(const SimulationState& sim) {
    const std::size_t next = model->from_configuration(sim.config);
    if (next != state) jumps[{state, next}] += 1;
    state = next;
  }
};

TEST(Advance, ThinningMatchesExactGenerator) {
  const int n = 2;
  const exact::TinyModel m(2, 2, 1.0, 0.8, n);
  const auto g = exact::build_generators(m);
  Configuration c{TorusGeometry(2)};
  c.place(0, 0.0);
  c.place(3, kPi);
  SimulationState sim = make_simulation(params(n, 1.0, 0.8, AngleModel::two_type, 21), c);
  TransitionRecorder rec{&m, m.from_configuration(sim.config)};
  while (sim.counters.events < 1000000) advance(sim, 1.0, rec);
  int checked = 0;
  for (const auto& [s, T] : rec.time)
    for (std::size_t t = 0; t < m.states(); ++t) {
      if (t == s) continue;
      const double q = g.full(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t));
      const auto it = rec.jumps.find({s, t});
      const double k = it == rec.jumps.end() ? 0.0 : it->second;
      if (q == 0.0) {
        EXPECT_EQ(k, 0.0);
        continue;
      }
      EXPECT_NEAR(k / T, q, 4 * std::sqrt(q / T)) << s << " -> " << t;
      ++checked;
    }
  EXPECT_GT(checked, 20);
}

TEST(Generator, ConstantsAreInTheKernel) {
  Rng rng = make_stream(1, "gen");
  const CylinderFunction one{[](const Configuration&) { return 1.0; }, {}};
  for (int t = 0; t < 20; ++t) {
    const Configuration c = random_config(5, 0.5, rng);
    EXPECT_EQ(apply_generator(one, c, params(5, 1.5, 1.0), 64), 0.0);
  }
}

TEST(Generator, CurrentDecomposition) {
  Rng rng = make_stream(2, "currents");
  const AngleFunction omega = [](double t) { return std::cos(t) + 0.3 * std::sin(2 * t); };
  for (int t = 0; t < 1000; ++t) {
    const Configuration c = random_config(5, 0.5, rng);
    const int x = static_cast<int>(uniform_index(rng, 25));
    const double lhs = generator_symmetric(weighted_occupation(x, omega), c);
    double rhs = 0.0;
    for (int axis = 0; axis < 2; ++axis)
      rhs += current_sym(c, c.geometry().neighbor(x, axis, -1), axis, omega) - current_sym(c, x, axis, omega);
    ASSERT_NEAR(lhs, rhs, 1e-13);
  }
}

TEST(Generator, GlauberPartIsAlignmentRate) {
  Rng rng = make_stream(3, "gamma");
  const AngleFunction omega = [](double t) { return std::cos(t); };
  for (int t = 0; t < 20; ++t) {
    const Configuration c = random_config(5, 0.7, rng);
    const int x = c.particles()[0];
    const double lg = generator_glauber(weighted_occupation(x, omega), c, 1.3, 1 << 12);
    EXPECT_NEAR(lg, alignment_rate(c, x, omega, 1.3, 1 << 13), 1e-9);
  }
}

TEST(Currents, EdgeCasesAndConservation) {
  Rng rng = make_stream(4, "tele");
  const AngleFunction omega = [](double t) { return std::sin(t) + 2.0; };
  const AngleFunction one = [](double) { return 1.0; };
  Configuration empty{TorusGeometry(4)};
  EXPECT_EQ(current_sym(empty, 0, 0, omega), 0.0);
  EXPECT_EQ(current_asym(empty, 0, 0, omega, 2.0), 0.0);
  EXPECT_EQ(alignment_rate(empty, 0, omega, 1.0), 0.0);
  for (int t = 0; t < 50; ++t) {
    const Configuration c = random_config(6, 0.5, rng);
    for (int axis = 0; axis < 2; ++axis)
      for (int x = 0; x < 36; ++x)
        EXPECT_EQ(current_sym(c, x, axis, one), c.eta(x) - c.eta(c.geometry().neighbor(x, axis, +1)));
    // exchanges conserve the total weighted mass
    double total = 0.0;
    for (int x = 0; x < 36; ++x) total += generator_symmetric(weighted_occupation(x, omega), c);
    EXPECT_NEAR(total, 0.0, 1e-12);
  }
}

// Var(M_T) scales like N^-2 for a smooth test function.
TEST(Martingale, VarianceScaling) {
  const auto G = [](double u1, double u2) { return std::sin(kTwoPi * u1) * std::cos(kTwoPi * u2); };
  const AngleFunction omega = [](double t) { return 1.0 + 0.5 * std::cos(t); };
  const double T = 0.01;
  const int R = 400;
  std::vector<double> ns, vars;
  for (int n : {8, 16, 32}) {
    double s = 0.0, s2 = 0.0;
    for (int r = 0; r < R; ++r) {
      Rng rng = make_stream(31, "site-sampler", r);
      SimulationState sim = make_simulation(params(n, 1.0, 1.0, AngleModel::continuum, 31), random_config(n, 0.4, rng), r);
      MartingaleTracker mt(sim, G, omega, 64);
      advance(sim, T, mt);
      const double v = mt.value(sim);
      s += v;
      s2 += v * v;
    }
    ns.push_back(n);
    vars.push_back((s2 - s * s / R) / (R - 1));
  }
  EXPECT_NEAR(exact::loglog_slope(ns, vars), -2.0, 0.5);
}

}  // namespace
}  // namespace aep
