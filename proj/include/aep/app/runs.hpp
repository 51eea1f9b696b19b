#pragma once

// Subcommand drivers. Each writes its artifacts plus manifest.json into the
// output directory and returns a report whose `ok` flag is the exit status.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "aep/app/config.hpp"
#include "aep/exact/suite.hpp"
#include "aep/field_io.hpp"
#include "aep/observables.hpp"
#include "aep/parallel.hpp"
#include "aep/pde.hpp"
#include "aep/reference_ds.hpp"
#include "aep/sampling.hpp"
#include "aep/selfdiff.hpp"
#include "aep/snapshot_io.hpp"
#include "aep/weak_form.hpp"

namespace aep::app {

#ifndef AEP_VERSION
#define AEP_VERSION "0.0.0"
#endif

struct Report {
  bool ok = true;
  nlohmann::json body = nlohmann::json::object();

  void check(const std::string& name, bool pass, nlohmann::json detail = nlohmann::json::object()) {
    detail["pass"] = pass;
    body["checks"][name] = std::move(detail);
    ok = ok && pass;
  }
};

inline nlohmann::json manifest(const RunConfig& cfg, const std::string& command) {
  return {{"command", command},
          {"version", AEP_VERSION},
          {"config_hash", cfg.config_hash()},
          {"config", cfg.source_text},
          {"seed", cfg.model.seed},
          {"streams", {"site-sampler", "dynamics", "gamma-quadrature"}},
          {"replicas", cfg.replicas}};
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << j.dump(2) << '\n';
}

inline unsigned workers_of(const RunConfig& cfg) { return cfg.workers ? cfg.workers : default_workers(); }

/// The d_s table named by pde.ds_table, or the built-in reference table.
inline DsTable resolve_ds_table(const RunConfig& cfg) {
  return cfg.pde.ds_path.empty() ? reference_ds_table() : DsTable::load(cfg.pde.ds_path);
}

// ---- simulation -----------------------------------------------------------

struct ReplicaTrace {
  std::vector<FieldSnapshot> frames;             // one per scheduled time
  std::vector<std::vector<double>> clusters;     // [time][p index]
  std::vector<double> density, mag_x, mag_y;     // global averages per time
  EventCounters counters;
  std::size_t particles = 0;
  bool budget_exhausted = false;
  bool conserved = true;
};

/// One replica at lattice side N: sample the initial profile with the
/// "site-sampler" substream `replica`, then run the "dynamics" substream.
inline ReplicaTrace simulate_replica(const RunConfig& cfg, const InitialProfile& profile, int N, std::size_t replica,
                                     Configuration* final_config = nullptr, Configuration* initial_config = nullptr) {
  ModelParams p = cfg.model;
  p.N = N;
  Rng site_rng = make_stream(p.seed, "site-sampler", replica);
  Configuration c = sample_product_measure(profile, TorusGeometry(N), site_rng);
  if (initial_config) *initial_config = c;
  SimulationState sim = make_simulation(p, std::move(c), replica);
  ReplicaTrace tr;
  tr.particles = sim.config.particle_count();
  const AngleBins bins(cfg.bins);
  const double area = 1.0 / (static_cast<double>(N) * N);
  for (double t : cfg.schedule()) {
    const auto res = advance(sim, t - sim.time);
    tr.budget_exhausted = tr.budget_exhausted || res.budget_exhausted;
    tr.frames.push_back(coarse_field(sim.config, cfg.grid, bins, t));
    std::vector<double> fc;
    for (int q : cfg.cluster_p) fc.push_back(full_cluster_fraction(sim.config, q));
    tr.clusters.push_back(fc);
    double mx = 0.0, my = 0.0;
    for (int s : sim.config.particles()) {
      mx += std::cos(sim.config.angle(s));
      my += std::sin(sim.config.angle(s));
    }
    tr.density.push_back(sim.config.particle_count() * area);
    tr.mag_x.push_back(mx * area);
    tr.mag_y.push_back(my * area);
    tr.conserved = tr.conserved && sim.config.particle_count() == tr.particles && sim.config.invariant_violation().empty();
  }
  tr.counters = sim.counters;
  if (final_config) *final_config = sim.config;
  return tr;
}

inline std::vector<ReplicaTrace> simulate_replicas(const RunConfig& cfg, const InitialProfile& profile, int N) {
  std::vector<ReplicaTrace> traces(cfg.replicas);
  parallel_for(
      traces.size(), [&](std::size_t r) { traces[r] = simulate_replica(cfg, profile, N, r); }, workers_of(cfg));
  return traces;
}

/// Replica-averaged coarse field at every scheduled time.
inline std::vector<FieldSnapshot> mean_frames(const std::vector<ReplicaTrace>& traces) {
  std::vector<FieldSnapshot> out;
  for (std::size_t t = 0; t < traces.front().frames.size(); ++t) {
    std::vector<FieldSnapshot> at;
    for (const auto& tr : traces) at.push_back(tr.frames[t]);
    out.push_back(average_snapshots(at));
  }
  return out;
}

inline Report run_simulate(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  const InitialProfile profile = make_profile(cfg.initial, cfg.model.angles);
  std::vector<ReplicaTrace> traces(cfg.replicas);
  Configuration first_initial{TorusGeometry(cfg.model.N)}, first_final{TorusGeometry(cfg.model.N)};
  parallel_for(
      traces.size(),
      [&](std::size_t r) {
        traces[r] = r == 0 ? simulate_replica(cfg, profile, cfg.model.N, r, &first_final, &first_initial)
                           : simulate_replica(cfg, profile, cfg.model.N, r);
      },
      workers_of(cfg));
  const auto frames = mean_frames(traces);
  write_field_tensor(dir / "field_mean", frames, {{"replicas", cfg.replicas}});
  {
    std::ofstream os(dir / "initial_snapshot.ndjson");
    write_snapshot(os, first_initial, {cfg.model.N, cfg.model.seed, 0.0});
    std::ofstream fs_(dir / "final_snapshot.ndjson");
    write_snapshot(fs_, first_final, {cfg.model.N, cfg.model.seed, cfg.model.horizon});
  }
  std::vector<std::string> header{"replica", "time", "density", "mag_x", "mag_y"};
  for (int q : cfg.cluster_p) header.push_back("full_cluster_p" + std::to_string(q));
  std::vector<std::vector<double>> rows;
  const auto times = cfg.schedule();
  double mean_density = 0.0;
  std::vector<double> replica_density;
  for (std::size_t r = 0; r < traces.size(); ++r) {
    double d = 0.0;
    for (std::size_t t = 0; t < times.size(); ++t) {
      std::vector<double> row{static_cast<double>(r), times[t], traces[r].density[t], traces[r].mag_x[t], traces[r].mag_y[t]};
      for (double v : traces[r].clusters[t]) row.push_back(v);
      rows.push_back(row);
      d += traces[r].density[t];
    }
    replica_density.push_back(d / times.size());
    mean_density += d / times.size();
  }
  mean_density /= traces.size();
  {
    std::ofstream os(dir / "series.csv");
    write_csv(os, header, rows);
  }
  Report rep;
  bool conserved = true, budget = false;
  nlohmann::json per;
  for (std::size_t r = 0; r < traces.size(); ++r) {
    conserved = conserved && traces[r].conserved;
    budget = budget || traces[r].budget_exhausted;
    per.push_back({{"replica", r},
                   {"site_stream", derive_seed(cfg.model.seed, "site-sampler", r)},
                   {"dynamics_stream", derive_seed(cfg.model.seed, "dynamics", r)},
                   {"particles", traces[r].particles},
                   {"events", traces[r].counters.events},
                   {"exchanges", traces[r].counters.exchanges},
                   {"blocked", traces[r].counters.blocked},
                   {"flips", traces[r].counters.flips}});
  }
  rep.body["replicas"] = per;
  rep.body["time_averaged_density"] = mean_density;
  rep.check("particle_number_conserved", conserved);
  rep.check("event_budget_respected", !budget);
  write_json(dir / "report.json", rep.body);
  write_json(dir / "manifest.json", manifest(cfg, "simulate"));
  return rep;
}

// ---- pde ------------------------------------------------------------------

/// Observation steps: the step count is a multiple of (slices - 1) so every
/// scheduled time falls on a step.
inline PdeConfig aligned_pde_config(const RunConfig& cfg) {
  PdeConfig pc = cfg.pde;
  if (pc.T > 0.0 && pc.dt == 0.0) {
    const int k = std::max(1, cfg.slices - 1);
    long n = static_cast<long>(std::ceil(pc.T / (0.8 * pc.dt_max()) - 1e-9));
    n = ((n + k - 1) / k) * k;
    pc.dt = pc.T / n;
  }
  return pc;
}

struct PdeRun {
  std::vector<FieldSnapshot> frames;  // coarse snapshots at the schedule
  std::vector<AngularDensityField> slices;
  PdeSolver::Result result;
  double mass0 = 0.0, mass_drift = 0.0, residual = 0.0;
};

inline PdeRun run_pde_core(const RunConfig& cfg, const DsTable& table, bool keep_slices, bool with_residual) {
  const PdeConfig pc = aligned_pde_config(cfg);
  const PdeSolver solver(pc, table);
  const InitialProfile profile = make_profile(cfg.initial, cfg.model.angles);
  AngularDensityField f0 = initial_field(profile, pc.L, pc.M);
  PdeRun run;
  run.mass0 = f0.total_mass();
  const auto times = cfg.schedule();
  std::size_t next = 0;
  WeakResidual wr(TestFunction::cosine_u1(), solver);
  run.result = solver.solve(std::move(f0), [&](const AngularDensityField& f) {
    if (with_residual) wr.add(f);
    if (next < times.size() && std::abs(f.time - times[next]) < 0.5 * solver.dt()) {
      run.frames.push_back(to_snapshot(f, cfg.grid));
      if (keep_slices) run.slices.push_back(f);
      ++next;
    }
  });
  run.mass_drift = std::abs(run.result.field.total_mass() - run.mass0);
  if (with_residual) run.residual = wr.value();
  return run;
}

inline Report run_pde(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  const DsTable table = resolve_ds_table(cfg);
  PdeRun run = run_pde_core(cfg, table, true, true);
  write_field_tensor(dir / "pde_field", run.frames, {{"L", cfg.pde.L}, {"steps", run.result.steps}});
  Report rep;
  const double T = std::max(cfg.pde.T, 1e-300);
  rep.body["steps"] = run.result.steps;
  rep.body["dt"] = aligned_pde_config(cfg).dt;
  rep.body["mass_initial"] = run.mass0;
  rep.body["mass_drift"] = run.mass_drift;
  rep.body["weak_residual_cos2piu1"] = run.residual;
  rep.body["min_bin_value"] = run.result.min_value;
  rep.body["limited_cells"] = run.result.totals.limited_cells;
  rep.body["clamped_bins"] = run.result.totals.clamped;
  rep.body["clamp_mass"] = run.result.totals.clamp_mass;
  std::vector<std::vector<double>> rows;
  for (const auto& s : run.slices) rows.push_back({s.time, s.total_mass(), dirichlet_energy(s), s.max_density()});
  {
    std::ofstream os(dir / "pde_series.csv");
    write_csv(os, {"time", "mass", "dirichlet_energy", "max_density"}, rows);
  }
  rep.check("mass_conservation", run.mass_drift <= 1e-10 * std::max(1.0, T), {{"drift", run.mass_drift}});
  rep.check("positivity", run.result.min_value >= -1e-10, {{"min", run.result.min_value}});
  rep.check("weak_residual", std::abs(run.residual) <= 1e-3, {{"residual", run.residual}});
  const bool heat = cfg.model.lambda == 0.0 && cfg.model.beta == 0.0 && cfg.initial.preset == "cosine";
  if (heat) {
    const auto& f = run.result.field;
    double err = 0.0;
    for (int j = 0; j < f.L; ++j)
      for (int i = 0; i < f.L; ++i) {
        const double u1 = (i + 0.5) / f.L;
        const double exact = cfg.initial.alpha + cfg.initial.amplitude * std::cos(kTwoPi * u1) * std::exp(-4 * kPi * kPi * f.time);
        err = std::max(err, std::abs(f.rho(static_cast<std::size_t>(i) + static_cast<std::size_t>(f.L) * j) - exact));
      }
    rep.check("heat_equation_linf", err <= 1e-3, {{"error", err}});
  }
  write_json(dir / "report.json", rep.body);
  write_json(dir / "manifest.json", manifest(cfg, "pde"));
  return rep;
}

// ---- selfdiff -------------------------------------------------------------

inline Report run_selfdiff(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  DsRunOptions o;
  o.N = cfg.ds_N;
  o.micro_time = cfg.ds_micro_time;
  o.replicas = cfg.ds_replicas;
  o.seed = cfg.model.seed;
  o.workers = workers_of(cfg);
  auto [table, est] = build_ds_table(cfg.ds_grid, o, cfg.ds_low_density_replicas);
  table.save(dir / "ds_table.csv", {{"N", o.N}, {"micro_time", o.micro_time}, {"replicas", o.replicas},
                                     {"low_density_replicas", cfg.ds_low_density_replicas}, {"seed", o.seed}});
  Report rep;
  nlohmann::json rows;
  bool isotropic = true;
  for (const auto& e : est) {
    rows.push_back({{"rho", e.rho}, {"estimate", e.value}, {"stderr", e.stderr_}, {"x", e.x}, {"y", e.y},
                    {"x_stderr", e.x_stderr}, {"y_stderr", e.y_stderr}, {"msd_over_t", e.raw_per_t},
                    {"environment_density", e.env_density}, {"environment_stderr", e.env_stderr}});
    if (e.rho < 1.0) isotropic = isotropic && std::abs(e.x - e.y) <= 3.0 * std::hypot(e.x_stderr, e.y_stderr);
  }
  rep.body["estimates"] = rows;
  rep.body["bound_constant"] = table.bound_constant();
  rep.check("endpoints_pinned", table.ds(0.0) == 1.0 && table.ds(1.0) == 0.0);
  rep.check("bound_constant_at_most_3", table.bound_constant() <= 3.0, {{"C", table.bound_constant()}});
  rep.check("isotropy", isotropic);
  if (cfg.ds_grid.front() == 0.0) rep.check("free_walk", std::abs(est.front().value - 1.0) <= 0.02, {{"value", est.front().value}});
  write_json(dir / "report.json", rep.body);
  write_json(dir / "manifest.json", manifest(cfg, "selfdiff"));
  return rep;
}

// ---- compare --------------------------------------------------------------

struct CompareRow {
  int N = 0;
  double D = 0.0;
  double noise_floor = 0.0;  // distance on the initial slice
  std::vector<double> clusters;  // time-averaged, per p
  double events = 0.0;
};

struct CompareResult {
  std::vector<CompareRow> rows;
  double slope = 0.0;
  double max_initial_density = 0.0;
};

/// Time-averaged L^1 distance between replica-averaged coarse fields and the
/// PDE solution averaged onto the same cells, for every lattice size.
inline CompareResult compare_core(const RunConfig& cfg, const DsTable& table) {
  const PdeRun pde = run_pde_core(cfg, table, false, false);
  const auto times = cfg.schedule();
  if (pde.frames.size() != times.size()) throw std::logic_error("compare: PDE frames do not match the schedule");
  const InitialProfile profile = make_profile(cfg.initial, cfg.model.angles);
  CompareResult out;
  for (int j = 0; j < 200; ++j)
    for (int i = 0; i < 200; ++i) out.max_initial_density = std::max(out.max_initial_density, profile.density(i / 200.0, j / 200.0));
  std::vector<double> ns, ds;
  for (int N : cfg.compare_sizes) {
    const auto traces = simulate_replicas(cfg, profile, N);
    const auto frames = mean_frames(traces);
    CompareRow row;
    row.N = N;
    for (std::size_t t = 0; t < times.size(); ++t) row.D += l1_distance(frames[t], pde.frames[t]);
    row.D /= times.size();
    row.noise_floor = l1_distance(frames.front(), pde.frames.front());
    row.clusters.assign(cfg.cluster_p.size(), 0.0);
    for (const auto& tr : traces) {
      for (const auto& fc : tr.clusters)
        for (std::size_t q = 0; q < fc.size(); ++q) row.clusters[q] += fc[q];
      row.events += static_cast<double>(tr.counters.events);
    }
    for (double& v : row.clusters) v /= static_cast<double>(traces.size() * times.size());
    out.rows.push_back(row);
    ns.push_back(N);
    ds.push_back(row.D);
  }
  out.slope = ns.size() >= 2 ? exact::loglog_slope(ns, ds) : 0.0;
  return out;
}

/// P(Binomial(|B_p|, rho) >= |B_p| - 1).
inline double binomial_full_tail(int p, double rho) {
  const int V = (2 * p + 1) * (2 * p + 1);
  return V * std::pow(rho, V - 1) * (1.0 - rho) + std::pow(rho, V);
}

inline Report run_compare(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  const DsTable table = resolve_ds_table(cfg);
  const CompareResult res = compare_core(cfg, table);
  Report rep;
  nlohmann::json rows;
  std::vector<std::vector<double>> csv;
  for (const auto& r : res.rows) {
    rows.push_back({{"N", r.N}, {"D", r.D}, {"noise_floor", r.noise_floor}, {"full_cluster", r.clusters}, {"events", r.events}});
    csv.push_back({static_cast<double>(r.N), r.D, r.noise_floor});
  }
  {
    std::ofstream os(dir / "compare.csv");
    write_csv(os, {"N", "D", "noise_floor"}, csv);
  }
  rep.body["rows"] = rows;
  rep.body["loglog_slope"] = res.slope;
  rep.body["max_initial_density"] = res.max_initial_density;
  bool decreasing = true;
  for (std::size_t i = 1; i < res.rows.size(); ++i) decreasing = decreasing && res.rows[i].D < res.rows[i - 1].D;
  rep.check("D_strictly_decreasing", decreasing);
  if (res.rows.size() >= 2)
    rep.check("D_ratio_last_first_below_0.6", res.rows.back().D < 0.6 * res.rows.front().D,
              {{"ratio", res.rows.back().D / res.rows.front().D}});
  // full clusters stay below three times the product-measure tail at the peak density
  const auto p2 = std::find(cfg.cluster_p.begin(), cfg.cluster_p.end(), 2);
  if (p2 != cfg.cluster_p.end()) {
    const std::size_t q = static_cast<std::size_t>(p2 - cfg.cluster_p.begin());
    const double bound = 3.0 * binomial_full_tail(2, res.max_initial_density);
    bool below = true, monotone = true;
    for (const auto& r : res.rows) {
      below = below && r.clusters[q] < bound;
      for (std::size_t i = 1; i < r.clusters.size(); ++i) monotone = monotone && r.clusters[i] <= r.clusters[i - 1];
    }
    rep.check("full_cluster_p2_below_3x_tail", below, {{"bound", bound}});
    rep.check("full_cluster_nonincreasing_in_p", monotone);
  }
  write_json(dir / "report.json", rep.body);
  write_json(dir / "manifest.json", manifest(cfg, "compare"));
  return rep;
}

// ---- exactcheck -----------------------------------------------------------

/// The suites run on the seeds of the calibration run that froze their
/// constants, so verdicts do not depend on model.seed.
inline std::vector<exact::Verdict> exact_verdicts(const RunConfig& cfg) {
  std::vector<exact::Verdict> all;
  auto append = [&](const std::vector<exact::Verdict>& v) { all.insert(all.end(), v.begin(), v.end()); };
  for (const auto& s : cfg.exact_suites) {
    if (s == "algebra") append(exact::algebra_suite());
    else if (s == "dirichlet") append(exact::dirichlet_suite());
    else if (s == "gap") append(exact::gap_suite(exact::gap_table()));
    else if (s == "irreducibility") append(exact::irreducibility_suite());
    else if (s == "ensembles") append(exact::ensemble_suite(exact::ensemble_table()));
  }
  return all;
}

inline Report run_exactcheck(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  Report rep;
  std::ofstream os(dir / "verdicts.ndjson");
  for (const auto& v : exact_verdicts(cfg)) {
    os << v.to_json().dump() << '\n';
    rep.ok = rep.ok && v.pass;
    rep.body["verdicts"].push_back(v.to_json());
  }
  write_json(dir / "report.json", rep.body);
  write_json(dir / "manifest.json", manifest(cfg, "exactcheck"));
  return rep;
}

}  // namespace aep::app
