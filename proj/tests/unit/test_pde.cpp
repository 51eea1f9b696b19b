#include <gtest/gtest.h>

#include <cmath>

#include "aep/pde.hpp"
#include "aep/reference_ds.hpp"
#include "aep/two_type_pde.hpp"
#include "aep/weak_form.hpp"

namespace aep {
namespace {

PdeConfig config(int L, int M, double lambda, double beta, double T, AngleModel m = AngleModel::continuum) {
  PdeConfig c;
  c.L = L;
  c.M = M;
  c.lambda = lambda;
  c.beta = beta;
  c.T = T;
  c.model = m;
  return c;
}

AngularDensityField random_field(int L, int M, std::uint64_t seed, double scale = 0.8) {
  Rng rng = make_stream(seed, "field");
  AngularDensityField f(L, M);
  for (std::size_t c = 0; c < f.cells(); ++c) {
    const double rho = scale * uniform01(rng);
    std::vector<double> w(M);
    double s = 0.0;
    for (auto& v : w) s += v = uniform01(rng);
    for (int k = 0; k < M; ++k) f.at(c, k) = rho * w[k] / s;
  }
  return f;
}

TEST(Coefficients, Limits) {
  const double ds_half = 0.35;
  const std::vector<double> zero(4, 0.0);
  for (double v : coeff_d(zero, 0.0, 1.0)) EXPECT_EQ(v, 0.0);
  for (double v : coeff_s(zero, 0.0, 1.0)) EXPECT_EQ(v, 0.0);
  const std::vector<double> full{0.1, 0.2, 0.3, 0.4};
  const auto d1 = coeff_d(full, 1.0, 0.0), s1 = coeff_s(full, 1.0, 0.0);
  for (int k = 0; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(d1[k], full[k]);
    EXPECT_EQ(s1[k], 0.0);
  }
  const std::vector<double> uni(8, 0.5 / 8);
  for (double v : coeff_d(uni, 0.5, ds_half)) EXPECT_DOUBLE_EQ(v, (1 - ds_half) / 8);
  // rho -> 0 with d_s(0) = 1
  const DsTable t = reference_ds_table();
  const std::vector<double> tiny{1e-9, 1e-9};
  for (double v : coeff_d(tiny, 2e-9, t.ds(2e-9))) EXPECT_LT(std::abs(v), 1e-7);
}

TEST(OmegaVector, SymmetryAtomsAndTwoType) {
  const auto u = omega_vector(std::vector<double>(8, 0.05));
  EXPECT_NEAR(u[0], 0.0, 1e-16);
  EXPECT_NEAR(u[1], 0.0, 1e-16);
  std::vector<double> one(8, 0.0);
  one[0] = 0.6;
  EXPECT_EQ(omega_vector(one)[0], 0.6);
  EXPECT_EQ(omega_vector(one)[1], 0.0);
  const auto tt = omega_vector(std::vector<double>{0.4, 0.1});
  EXPECT_EQ(tt[0], 0.4 - 0.1);
  EXPECT_EQ(tt[1], 0.0);
}

TEST(CreationRate, BetaZeroClosedForms) {
  const std::vector<double> rh{0.1, 0.05, 0.2, 0.0};
  const auto g = creation_rate(rh, 0.0, AngleModel::continuum, 16, 1);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(g.values[k], 0.35 / 4 - rh[k], 1e-16);
  for (double v : creation_rate(std::vector<double>(6, 0.1), 0.0, AngleModel::continuum, 16, 1).values) EXPECT_NEAR(v, 0.0, 1e-16);
  const auto t = creation_rate_two_type(0.4, 0.1, 0.0);
  EXPECT_NEAR(t.values[0], 0.25 - 0.4, 1e-15);
  EXPECT_NEAR(t.values[1], 0.25 - 0.1, 1e-15);
}

TEST(CreationRate, TwoTypeEnumerationVsMonteCarlo) {
  const auto exact = creation_rate_two_type(0.4, 0.1, 1.0);
  const auto mc = creation_rate_two_type_mc(0.4, 0.1, 1.0, 100000, 5);
  EXPECT_NEAR(exact.values[0] + exact.values[1], 0.0, 1e-16);
  EXPECT_NEAR(mc.values[0], exact.values[0], 4 * mc.stderrs[0]);
  // alignment shifts creation toward the majority relative to the blind rate
  EXPECT_GT(exact.values[0], creation_rate_two_type(0.4, 0.1, 0.0).values[0]);
  EXPECT_GT(creation_rate_two_type(0.4, 0.1, 2.0).values[0], exact.values[0]);
}

TEST(CreationRate, ContinuumSumsToZeroAndFavoursMajority) {
  std::vector<double> rh(8, 0.02);
  rh[0] = 0.4;
  const auto g = creation_rate(rh, 2.0, AngleModel::continuum, 4096, 3);
  double s = 0.0;
  for (double v : g.values) s += v;
  EXPECT_NEAR(s, 0.0, 1e-15);
  EXPECT_GT(g.values[1], 0.0);  // mass pulled toward the neighbouring direction
}

TEST(Solver, UniformIsAFixedPoint) {
  const PdeSolver s(config(8, 4, 0.0, 0.0, 0.01), reference_ds_table());
  AngularDensityField f(8, 4);
  for (auto& v : f.data) v = 0.1;
  const auto before = f.data;
  for (int i = 0; i < 10; ++i) s.step(f);
  for (std::size_t i = 0; i < f.data.size(); ++i) EXPECT_NEAR(f.data[i], before[i], 1e-16);
}

TEST(Solver, AngleSumObeysDiscreteHeatEquation) {
  const PdeSolver s(config(12, 5, 0.0, 0.0, 0.01), reference_ds_table());
  AngularDensityField f = random_field(12, 5, 3);
  std::vector<double> rho(f.cells());
  for (std::size_t c = 0; c < f.cells(); ++c) rho[c] = f.rho(c);
  s.step(f);
  const int L = 12;
  const double r = s.dt() * L * L;
  for (int j = 0; j < L; ++j)
    for (int i = 0; i < L; ++i) {
      auto at = [&](int a, int b) { return rho[((a + L) % L) + L * ((b + L) % L)]; };
      const double heat = at(i, j) + r * (at(i + 1, j) + at(i - 1, j) + at(i, j + 1) + at(i, j - 1) - 4 * at(i, j));
      EXPECT_NEAR(f.rho(i + L * j), heat, 1e-14);
    }
}

TEST(Solver, MassConservationAndPositivity) {
  PdeConfig c = config(16, 8, 3.0, 1.5, 0.02);
  c.gamma_samples = 256;
  const PdeSolver s(c, reference_ds_table());
  AngularDensityField f = random_field(16, 8, 4, 0.95);
  const double m0 = f.total_mass();
  const auto res = s.solve(f);
  EXPECT_LE(std::abs(res.field.total_mass() - m0), 1e-10 * c.T);
  EXPECT_GE(res.min_value, -1e-10);
}

TEST(Solver, RejectsUnstableStep) {
  PdeConfig c = config(32, 4, 0.0, 0.0, 0.1);
  c.dt = 2.0 * c.dt_max();
  EXPECT_THROW(PdeSolver(c, reference_ds_table()), std::invalid_argument);
}

TEST(Solver, HeatRegimeMatchesDecayingCosine) {
  PdeConfig c = config(64, 4, 0.0, 0.0, 0.05);
  const PdeSolver s(c, reference_ds_table());
  const auto prof = InitialProfile([](double u1, double) { return AngleMeasure::uniform(0.3 + 0.1 * std::cos(kTwoPi * u1)); });
  const auto res = s.solve(initial_field(prof, 64, 4));
  double err = 0.0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; j += 7) {
      const double exact = 0.3 + 0.1 * std::cos(kTwoPi * (i + 0.5) / 64) * std::exp(-4 * kPi * kPi * 0.05);
      err = std::max(err, std::abs(res.field.rho(i + 64 * j) - exact));
    }
  EXPECT_LE(err, 1e-3);
}

TEST(TwoType, GeneralSolverReproducesDedicatedSolver) {
  PdeConfig c = config(16, 2, 2.0, 0.7, 0.01, AngleModel::two_type);
  c.limiter = false;
  const PdeSolver general(c, reference_ds_table());
  const TwoTypeSolver dedicated(2.0, 0.7, general.dt(), reference_ds_table());
  AngularDensityField f = random_field(16, 2, 6, 0.9);
  TwoTypeField g = TwoTypeField::from(f);
  for (int step = 0; step < 20; ++step) {
    general.step(f);
    dedicated.step(g);
    const AngularDensityField h = g.to_field();
    double diff = 0.0;
    for (std::size_t i = 0; i < f.data.size(); ++i) diff = std::max(diff, std::abs(f.data[i] - h.data[i]));
    ASSERT_LE(diff, 1e-10) << "step " << step;
    g = TwoTypeField::from(f);  // per-step comparison
  }
}

// Independent 1D solve of the two-type system for profiles varying in u1 only:
//   d_t r+ = d1[ (r+/r)(1 - d_s) d1 r + d_s d1 r+ ] - 2 lambda d1[ (r+/r)(1 - r - d_s) m + d_s r+ ] + r/2 - r+
//   d_t r- = d1[ (r-/r)(1 - d_s) d1 r + d_s d1 r- ] - 2 lambda d1[ (r-/r)(1 - r - d_s) m - d_s r- ] + r/2 - r-
// with m = r+ - r-, on a grid four times finer, integrated with RK2.
std::pair<std::vector<double>, std::vector<double>> fine_1d(std::vector<double> p, std::vector<double> q, double lambda, double T,
                                                            const DsTable& ds) {
  const int n = static_cast<int>(p.size());
  const double h = 1.0 / n;
  auto rhs = [&](const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& da, std::vector<double>& db) {
    std::vector<double> fa(n), fb(n);  // flux through the right face of cell i
    auto coeffs = [&](int i, double& dp, double& dm, double& sp, double& sm, double& d, double& m) {
      const double r = a[i] + b[i];
      d = ds.ds(r);
      m = a[i] - b[i];
      dp = r > 0 ? a[i] / r * (1 - d) : 0;
      dm = r > 0 ? b[i] / r * (1 - d) : 0;
      sp = r > 0 ? a[i] / r * (1 - r - d) : 0;
      sm = r > 0 ? b[i] / r * (1 - r - d) : 0;
    };
    for (int i = 0; i < n; ++i) {
      const int j = (i + 1) % n;
      double dp0, dm0, sp0, sm0, d0, m0, dp1, dm1, sp1, sm1, d1, m1;
      coeffs(i, dp0, dm0, sp0, sm0, d0, m0);
      coeffs(j, dp1, dm1, sp1, sm1, d1, m1);
      const double grad_r = ((a[j] + b[j]) - (a[i] + b[i])) / h;
      const double dbar = 0.5 * (d0 + d1);
      fa[i] = 0.5 * (dp0 + dp1) * grad_r + dbar * (a[j] - a[i]) / h - lambda * (sp0 * m0 + d0 * a[i] + sp1 * m1 + d1 * a[j]);
      fb[i] = 0.5 * (dm0 + dm1) * grad_r + dbar * (b[j] - b[i]) / h - lambda * (sm0 * m0 - d0 * b[i] + sm1 * m1 - d1 * b[j]);
    }
    for (int i = 0; i < n; ++i) {
      const int k = (i + n - 1) % n;
      const double r = a[i] + b[i];
      da[i] = (fa[i] - fa[k]) / h + r / 2 - a[i];
      db[i] = (fb[i] - fb[k]) / h + r / 2 - b[i];
    }
  };
  const double dt0 = 0.2 * h * h;
  const int steps = static_cast<int>(std::ceil(T / dt0));
  const double dt = T / steps;
  std::vector<double> k1a(n), k1b(n), k2a(n), k2b(n), ta(n), tb(n);
  for (int s = 0; s < steps; ++s) {
    rhs(p, q, k1a, k1b);
    for (int i = 0; i < n; ++i) ta[i] = p[i] + dt * k1a[i], tb[i] = q[i] + dt * k1b[i];
    rhs(ta, tb, k2a, k2b);
    for (int i = 0; i < n; ++i) p[i] += 0.5 * dt * (k1a[i] + k2a[i]), q[i] += 0.5 * dt * (k1b[i] + k2b[i]);
  }
  return {p, q};
}

TEST(TwoType, MatchesFineOneDimensionalSolve) {
  const double lambda = 1.0, T = 0.05;
  const int L = 64, refine = 4, n = L * refine;
  auto plus = [](double u) { return 0.3 + 0.1 * std::sin(kTwoPi * u); };
  auto minus = [](double u) { return 0.15 + 0.05 * std::cos(kTwoPi * u); };
  const DsTable ds = reference_ds_table();

  PdeConfig c = config(L, 2, lambda, 0.0, T, AngleModel::two_type);
  const PdeSolver s(c, ds);
  const auto prof = InitialProfile::two_type([&](double u, double) { return plus(u); }, [&](double u, double) { return minus(u); });
  const auto coarse = s.solve(initial_field(prof, L, 2)).field;

  std::vector<double> p(n), q(n);
  for (int i = 0; i < n; ++i) p[i] = plus((i + 0.5) / n), q[i] = minus((i + 0.5) / n);
  const auto [fp, fq] = fine_1d(p, q, lambda, T, ds);

  // Compare cell averages of the fine solution with the coarse cells of row 0.
  // The coarse initial data are point values, so use point values of the fine
  // solution interpolated at coarse centres.
  double l1 = 0.0;
  for (int i = 0; i < L; ++i) {
    const int a = i * refine + refine / 2 - 1, b = a + 1;  // fine cells straddling the coarse centre
    const double rp = 0.5 * (fp[a] + fp[b]), rm = 0.5 * (fq[a] + fq[b]);
    for (int j = 0; j < L; j += 9) {
      const std::size_t cell = static_cast<std::size_t>(i) + static_cast<std::size_t>(L) * j;
      l1 += (std::abs(coarse.at(cell, 0) - rp) + std::abs(coarse.at(cell, 1) - rm)) / L;
    }
  }
  l1 /= (L + 8) / 9;
  EXPECT_LE(l1, 1e-3);
}

TEST(WeakForm, ConstantSolutionHasNoResidual) {
  const PdeSolver s(config(16, 4, 0.0, 0.0, 0.01), reference_ds_table());
  AngularDensityField f(16, 4);
  for (auto& v : f.data) v = 0.1;
  std::vector<AngularDensityField> slices;
  for (int k = 0; k <= 10; ++k) {
    f.time = 0.001 * k;
    slices.push_back(f);
  }
  const auto H = TestFunction::separable([](double a, double b) { return std::sin(kTwoPi * a) + std::cos(kTwoPi * b); },
                                         [](double a, double) { return kTwoPi * std::cos(kTwoPi * a); },
                                         [](double, double b) { return -kTwoPi * std::sin(kTwoPi * b); },
                                         [](double a, double) { return -kTwoPi * kTwoPi * std::sin(kTwoPi * a); },
                                         [](double, double b) { return -kTwoPi * kTwoPi * std::cos(kTwoPi * b); },
                                         [](double t) { return 1 + std::cos(t); });
  EXPECT_LE(std::abs(weak_form_residual(slices, H, s)), 1e-8);
}

TEST(WeakForm, LinearInTheTestFunction) {
  PdeConfig c = config(16, 4, 1.0, 1.0, 0.004);
  c.gamma_samples = 128;
  const PdeSolver s(c, reference_ds_table());
  std::vector<AngularDensityField> slices;
  s.solve(random_field(16, 4, 9), [&](const AngularDensityField& f) { slices.push_back(f); });
  const auto H1 = TestFunction::cosine_u1(1);
  const auto H2 = TestFunction::separable([](double, double b) { return std::sin(kTwoPi * b); },
                                          [](double, double) { return 0.0; },
                                          [](double, double b) { return kTwoPi * std::cos(kTwoPi * b); },
                                          [](double, double) { return 0.0; },
                                          [](double, double b) { return -kTwoPi * kTwoPi * std::sin(kTwoPi * b); },
                                          [](double t) { return std::sin(t); });
  const double a = weak_form_residual(slices, H1, s), b = weak_form_residual(slices, H2, s);
  const double ab = weak_form_residual(slices, H1 + H2, s);
  EXPECT_NEAR(ab, a + b, 1e-14 * (1 + std::abs(a) + std::abs(b)));
}

TEST(WeakForm, HeatResidualShrinksUnderRefinement) {
  double r[2];
  for (int i = 0; i < 2; ++i) {
    const int L = 16 << i;
    const PdeSolver s(config(L, 2, 0.0, 0.0, 0.05), reference_ds_table());
    const auto prof = InitialProfile([](double u1, double) { return AngleMeasure::uniform(0.4 + 0.2 * std::cos(kTwoPi * u1)); });
    WeakResidual wr(TestFunction::cosine_u1(), s);
    s.solve(initial_field(prof, L, 2), [&](const AngularDensityField& f) { wr.add(f); });
    r[i] = std::abs(wr.value());
  }
  EXPECT_LE(r[1], 1e-3);
  EXPECT_GE(r[0] / r[1], 3.0);
}

TEST(Snapshot, CoarseAveragingPreservesMass) {
  const AngularDensityField f = random_field(32, 4, 10);
  const FieldSnapshot s = to_snapshot(f, 8);
  double total = 0.0;
  for (double m : s.mass) total += m * s.cell_area();
  EXPECT_NEAR(total, f.total_mass(), 1e-14);
}

}  // namespace
}  // namespace aep
