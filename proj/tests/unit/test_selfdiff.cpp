#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "aep/reference_ds.hpp"
#include "aep/selfdiff.hpp"

namespace aep {
namespace {

DsRunOptions quick(int n, double t, int replicas, std::uint64_t seed) {
  DsRunOptions o;
  o.N = n;
  o.micro_time = t;
  o.replicas = replicas;
  o.seed = seed;
  o.workers = 1;
  return o;
}

TEST(EstimateDs, FullLatticeIsExactlyZero) {
  const DsEstimate e = estimate_ds(1.0, quick(16, 50, 4, 1));
  EXPECT_EQ(e.value, 0.0);
  EXPECT_EQ(e.stderr_, 0.0);
}

TEST(EstimateDs, FreeWalkNormalization) {
  const DsEstimate e = estimate_ds(0.0, quick(16, 100, 40000, 2));
  EXPECT_NEAR(e.value, 1.0, 3 * e.stderr_);
  EXPECT_LT(e.stderr_, 0.01);
  EXPECT_NEAR(e.raw_per_t, 2.0 * e.value, 0.05);  // the /t convention doubles the value
}

TEST(EstimateDs, HalfFillingIsotropyAndEnvironment) {
  const DsEstimate e = estimate_ds(0.5, quick(32, 100, 8, 3));
  EXPECT_GT(e.value, 0.0);
  EXPECT_LE(e.value, 0.5);
  EXPECT_LT(std::abs(e.x - e.y), 3 * std::hypot(e.x_stderr, e.y_stderr));
  EXPECT_NEAR(e.env_density, 0.5, 4 * e.env_stderr + 1e-12);
}

TEST(EstimateDs, Deterministic) {
  const DsEstimate a = estimate_ds(0.3, quick(16, 20, 3, 4)), b = estimate_ds(0.3, quick(16, 20, 3, 4));
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.x, b.x);
}

TEST(Jackknife, MeanAndStandardError) {
  const auto [m, se] = detail::jackknife_mean({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_NEAR(se, std::sqrt(1.25 / 3.0), 1e-15);  // equals s / sqrt(n) for the mean
}

TEST(Isotonic, PoolsViolatorsWithWeights) {
  EXPECT_EQ(isotonic_nonincreasing({3, 2, 1}, {1, 1, 1}), (std::vector<double>{3, 2, 1}));
  const auto y = isotonic_nonincreasing({1.0, 2.0, 0.5}, {1.0, 3.0, 1.0});
  EXPECT_DOUBLE_EQ(y[0], 1.75);
  EXPECT_DOUBLE_EQ(y[1], 1.75);
  EXPECT_DOUBLE_EQ(y[2], 0.5);
}

TEST(DsTable, PinnedMonotoneAndSmooth) {
  const DsTable t = DsTable::from_estimates({0, 0.25, 0.5, 0.75, 1}, {1.03, 0.58, 0.62, 0.14, 0.01}, {0.01, 0.02, 0.02, 0.01, 0.0});
  EXPECT_EQ(t.ds(0.0), 1.0);
  EXPECT_EQ(t.ds(1.0), 0.0);
  const auto f = t.fitted();
  for (std::size_t i = 1; i < f.size(); ++i) EXPECT_LE(f[i], f[i - 1]);
  for (double r = 0.0; r < 1.0; r += 0.01) {
    EXPECT_LE(t.ds(r + 0.01), t.ds(r) + 1e-15);
    const double fd = (t.ds(std::min(1.0, r + 1e-6)) - t.ds(std::max(0.0, r - 1e-6))) / (std::min(1.0, r + 1e-6) - std::max(0.0, r - 1e-6));
    EXPECT_NEAR(t.ds_prime(r), fd, 1e-4) << r;
  }
  EXPECT_THROW(DsTable().ds(0.5), std::logic_error);
}

TEST(DsTable, CsvRoundTrip) {
  const DsTable t = reference_ds_table();
  const auto path = std::filesystem::temp_directory_path() / "aep_ds_table_test.csv";
  t.save(path, {{"note", "test"}});
  const DsTable u = DsTable::load(path);
  for (double r = 0.0; r <= 1.0; r += 0.05) {
    EXPECT_EQ(t.ds(r), u.ds(r));
    EXPECT_EQ(t.ds_prime(r), u.ds_prime(r));
  }
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
}

TEST(ReferenceTable, ProposedBounds) {
  const DsTable t = reference_ds_table();
  EXPECT_LE(t.bound_constant(), 3.0);
  for (double r = 0.0; r < 1.0; r += 0.01) {
    EXPECT_LE(t.ds(r), 3.0 * (1 - r));
    EXPECT_GE(t.ds(r), (1 - r) / 3.0);
  }
}

}  // namespace
}  // namespace aep
