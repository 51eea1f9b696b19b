// Acceptance run: one PASS/FAIL line per criterion.
//
//   aep_acceptance            all criteria
//   aep_acceptance 3 4        selected criteria
//
// Presets come from configs/ in the source tree so the numbers here are the
// numbers a user gets from the CLI.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "aep/app/runs.hpp"
#include "aep/glauber.hpp"

#ifndef AEP_SOURCE_DIR
#define AEP_SOURCE_DIR "."
#endif

namespace {

using namespace aep;
using namespace aep::app;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

RunConfig preset(const std::string& name) { return load_config(std::string(AEP_SOURCE_DIR) + "/configs/" + name, false); }

Outcome verdict_outcome(const std::vector<exact::Verdict>& vs) {
  Outcome o{true, ""};
  double worst = 0.0;
  for (const auto& v : vs) {
    if (!v.pass) {
      o.pass = false;
      o.detail += "failed " + v.name + " (defect " + fmt("%.3g", v.defect) + "); ";
    }
    // negative controls pass by exceeding their threshold; only bounds enter the summary
    if (v.tolerance > 0 && v.defect <= v.tolerance) worst = std::max(worst, v.defect / v.tolerance);
  }
  o.detail += fmt("%zu verdicts, worst bound defect/tolerance %.3g", vs.size(), worst);
  return o;
}

// 1. generator algebra on tiny tori
Outcome exact_algebra() { return verdict_outcome(exact::algebra_suite()); }

// 2. Glauber density normalization and sampler goodness of fit
Outcome glauber() {
  Rng rng = make_stream(2, "acceptance-glauber");
  const int Q = 1 << 14;
  double worst_norm = 0.0;
  auto random_site = [&] {
    Configuration c{TorusGeometry(5)};
    c.place(12, kTwoPi * uniform01(rng));
    for (int s : {7, 11, 13, 17})
      if (uniform01(rng) < 0.75) c.place(s, kTwoPi * uniform01(rng));
    return c;
  };
  for (int t = 0; t < 100; ++t) {
    const Configuration c = random_site();
    const double beta = 4.0 * uniform01(rng);
    double s = 0.0;
    for (int q = 0; q < Q; ++q) s += glauber_density(c, 12, kTwoPi * q / Q, beta);
    worst_norm = std::max(worst_norm, std::abs(s * kTwoPi / Q - 1.0));
  }
  double min_p = 1.0;
  std::string ps;
  for (double beta : {0.0, 0.5, 2.0}) {
    const Configuration c = random_site();
    const int bins = 40, n = 100000;
    std::vector<double> obs(bins, 0.0), prob(bins, 0.0);
    for (int i = 0; i < n; ++i)
      obs[std::min(bins - 1, static_cast<int>(sample_glauber_angle(c, 12, beta, rng) / kTwoPi * bins))] += 1;
    for (int k = 0; k < bins; ++k)
      for (int q = 0; q < 64; ++q) prob[k] += glauber_density(c, 12, kTwoPi * (k + (q + 0.5) / 64) / bins, beta) / bins / 64 * kTwoPi;
    double stat = 0.0;
    for (int k = 0; k < bins; ++k) stat += (obs[k] - n * prob[k]) * (obs[k] - n * prob[k]) / (n * prob[k]);
    const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(bins - 1), stat));
    min_p = std::min(min_p, p);
    ps += fmt(" p(beta=%.1f)=%.3f", beta, p);
  }
  return {worst_norm <= 1e-10 && min_p > 0.01, fmt("max |int c - 1| = %.2e;", worst_norm) + ps};
}

// 3. self-diffusion table and finite-size agreement
Outcome selfdiff() {
  DsRunOptions o;
  o.N = 64;
  o.micro_time = 200;
  o.replicas = 32;
  o.seed = 303;
  const auto [table, est] = build_ds_table({0.0, 0.25, 0.5, 0.75, 1.0}, o, 200000);
  bool ok = true;
  std::string d;
  const double d0 = est.front().value;
  ok = ok && std::abs(d0 - 1.0) <= 0.02;
  d += fmt("d(0)=%.4f+-%.4f", d0, est.front().stderr_);
  ok = ok && est.back().value == 0.0;
  d += fmt(" d(1)=%g", est.back().value);
  const auto fit = table.fitted();
  for (std::size_t i = 0; i + 1 < fit.size(); ++i) {
    const double ratio = fit[i] / (1.0 - table.grid()[i]);
    ok = ok && ratio >= 1.0 / 3.0 && ratio <= 3.0 && fit[i + 1] <= fit[i];
    d += fmt(" d(%.2f)/(1-rho)=%.3f", table.grid()[i], ratio);
  }
  DsRunOptions big = o;
  big.N = 128;
  big.replicas = 16;
  big.seed = 304;
  const DsEstimate e64 = est[2], e128 = estimate_ds(0.5, big);
  const double joint = std::hypot(e64.stderr_, e128.stderr_);
  ok = ok && std::abs(e64.value - e128.value) <= 3 * joint;
  d += fmt("; rho=0.5: N=64 %.4f+-%.4f, N=128 %.4f+-%.4f", e64.value, e64.stderr_, e128.value, e128.stderr_);
  return {ok, d};
}

// 4. PDE conservation, heat oracle and weak-form refinement
Outcome pde() {
  bool ok = true;
  std::string d;
  const DsTable table = reference_ds_table();
  RunConfig heat = preset("heat.ini");
  heat.initial.alpha = 0.3;
  heat.initial.amplitude = 0.1;
  const PdeRun h = run_pde_core(heat, table, false, false);
  double err = 0.0;
  const auto& f = h.result.field;
  for (int j = 0; j < f.L; ++j)
    for (int i = 0; i < f.L; ++i) {
      const double exact = 0.3 + 0.1 * std::cos(kTwoPi * (i + 0.5) / f.L) * std::exp(-4 * kPi * kPi * f.time);
      err = std::max(err, std::abs(f.rho(static_cast<std::size_t>(i + f.L * j)) - exact));
    }
  ok = ok && err <= 1e-3 && f.L == 64;
  d += fmt("heat Linf %.2e at L=%d T=%.2f", err, f.L, f.time);

  RunConfig drift = preset("drift.ini");
  double residual[2];
  double worst_mass = h.mass_drift / heat.pde.T;
  double min_value = h.result.min_value;
  for (int r = 0; r < 2; ++r) {
    drift.pde.L = 64 << r;
    const PdeRun run = run_pde_core(drift, table, false, true);
    residual[r] = std::abs(run.residual);
    worst_mass = std::max(worst_mass, run.mass_drift / drift.pde.T);
    min_value = std::min(min_value, run.result.min_value);
  }
  ok = ok && residual[0] / residual[1] >= 3.0;
  d += fmt("; weak residual L=64 %.3e, L=128 %.3e (ratio %.2f)", residual[0], residual[1], residual[0] / residual[1]);

  RunConfig aligned = preset("drift.ini");
  aligned.model.beta = aligned.pde.beta = 1.5;
  // continuum Gamma is a per-cell quadrature, so this run is kept short
  aligned.pde.L = 32;
  aligned.pde.T = 0.005;
  aligned.pde.gamma_samples = 256;
  const PdeRun a = run_pde_core(aligned, table, false, false);
  worst_mass = std::max(worst_mass, a.mass_drift / aligned.pde.T);
  min_value = std::min(min_value, a.result.min_value);
  ok = ok && worst_mass <= 1e-10 && min_value >= -1e-10;
  d += fmt("; mass drift per unit time <= %.2e; min bin %.2e", worst_mass, min_value);
  return {ok, d};
}

// 5 and 6 share one comparison run.
struct HydroRun {
  CompareResult result;
  bool done = false;
};

HydroRun& hydro() {
  static HydroRun run;
  if (!run.done) {
    const RunConfig c = preset("hydro.ini");
    run.result = compare_core(c, reference_ds_table());
    run.done = true;
  }
  return run;
}

Outcome hydrodynamic_convergence() {
  const auto& r = hydro().result;
  bool decreasing = true;
  std::string d;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (i > 0) decreasing = decreasing && r.rows[i].D < r.rows[i - 1].D;
    d += fmt("D(%d)=%.4f (t=0 floor %.4f) ", r.rows[i].N, r.rows[i].D, r.rows[i].noise_floor);
  }
  const double ratio = r.rows.back().D / r.rows.front().D;
  d += fmt("ratio %.3f, slope %.2f", ratio, r.slope);
  return {decreasing && ratio < 0.6 && r.rows.size() == 3, d};
}

Outcome full_clusters() {
  const auto& r = hydro().result;
  const RunConfig c = preset("hydro.ini");
  const double bound = 3.0 * binomial_full_tail(2, r.max_initial_density);
  bool ok = true;
  std::string d = fmt("bound 3 x tail(p=2, rho_max=%.3f) = %.3e;", r.max_initial_density, bound);
  for (const auto& row : r.rows) {
    const auto& fc = row.clusters;  // p = 1, 2, 3
    ok = ok && fc.size() == 3 && fc[1] < bound && fc[0] >= fc[1] && fc[1] >= fc[2];
    d += fmt(" N=%d: %.2e %.2e %.2e", row.N, fc[0], fc[1], fc[2]);
  }
  return {ok && c.cluster_p == std::vector<int>{1, 2, 3}, d};
}

Outcome irreducibility() { return verdict_outcome(exact::irreducibility_suite()); }
Outcome ensembles() { return verdict_outcome(exact::ensemble_suite(exact::ensemble_table())); }
Outcome spectral_gap() { return verdict_outcome(exact::gap_suite(exact::gap_table())); }

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "exact generator algebra", 300, exact_algebra},
      {2, "Glauber sampler", 120, glauber},
      {3, "self-diffusion", 1800, selfdiff},
      {4, "PDE solver", 600, pde},
      {5, "hydrodynamic convergence", 4 * 3600, hydrodynamic_convergence},
      {6, "full-cluster control", 4 * 3600, full_clusters},
      {7, "irreducibility", 120, irreducibility},
      {8, "equivalence of ensembles", 600, ensembles},
      {9, "angle-blind spectral gap", 300, spectral_gap},
  };
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::stoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!pick.empty() && !pick.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.budget_seconds;
    failures += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail
              << fmt(" [%.1f s]", secs) << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
