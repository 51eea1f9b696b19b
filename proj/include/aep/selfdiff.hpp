#pragma once

// Self-diffusion coefficient of the SSEP by tagged-particle simulation,
// and its monotone tabulation.
//
// Normalization: d_s = lim MSD_1(t) / (2t) in microscopic time, so a free
// walk (rate 1 per direction) has d_s(0) = 1. The unnormalized MSD_1(t)/t
// is exported alongside.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "aep/dynamics.hpp"
#include "aep/observables.hpp"
#include "aep/parallel.hpp"
#include "aep/rng.hpp"

namespace aep {

struct DsEstimate {
  double rho = 0.0;
  double value = 0.0;   // mean of both coordinates
  double stderr_ = 0.0;
  double x = 0.0, x_stderr = 0.0;
  double y = 0.0, y_stderr = 0.0;
  double raw_per_t = 0.0;  // MSD_1(t) / t at the final time
  double env_density = 0.0;  // occupied fraction of B_2 around tagged particles at the end
  double env_stderr = 0.0;
  int N = 0;
  double micro_time = 0.0;
  int replicas = 0;
};

struct DsRunOptions {
  int N = 64;
  double micro_time = 200.0;  // total microscopic time t
  int replicas = 16;
  std::uint64_t seed = 1;
  unsigned workers = default_workers();
};

namespace detail {

/// Mean and jackknife standard error of per-replica values.
inline std::pair<double, double> jackknife_mean(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n == 0) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / n;
  if (n == 1) return {mean, std::numeric_limits<double>::infinity()};
  double acc = 0.0;
  for (double x : v) {
    const double loo = (sum - x) / (n - 1);
    acc += (loo - mean) * (loo - mean);
  }
  return {mean, std::sqrt(acc * (n - 1) / n)};
}

}  // namespace detail

/// Tagged-particle SSEP at equilibrium density rho on an N-torus. Every
/// particle is tagged; the initial law is Bernoulli(rho) with the origin
/// occupied. The estimate is the late-time slope
///   (MSD(t) - MSD(t/2)) / (2 * t/2)
/// which removes the initial transient of MSD(t)/(2t).
inline DsEstimate estimate_ds(double rho, const DsRunOptions& opt) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("estimate_ds: rho must lie in [0,1]");
  if (opt.N < 5 || opt.replicas < 1 || !(opt.micro_time > 0.0)) throw std::invalid_argument("estimate_ds: bad run options");
  DsEstimate out;
  out.rho = rho;
  out.N = opt.N;
  out.micro_time = opt.micro_time;
  out.replicas = opt.replicas;
  if (rho == 1.0) {
    out.env_density = 1.0;
    return out;
  }
  const double half_macro = 0.5 * opt.micro_time / (static_cast<double>(opt.N) * opt.N);
  std::vector<double> sx(opt.replicas), sy(opt.replicas), raw(opt.replicas), env(opt.replicas);
  parallel_for(
      static_cast<std::size_t>(opt.replicas),
      [&](std::size_t r) {
        const TorusGeometry geom(opt.N);
        Rng site_rng = make_stream(opt.seed, "site-sampler", r);
        Configuration c(geom);
        c.place(0, 0.0);
        for (int s = 1; s < static_cast<int>(geom.site_count()); ++s)
          if (uniform01(site_rng) < rho) c.place(s, 0.0);
        ModelParams p;
        p.N = opt.N;
        p.seed = opt.seed;
        SimulationState sim = make_simulation(p, std::move(c), r);
        MsdTracker msd(sim);
        advance(sim, half_macro);
        const MsdSample a = msd.record(sim);
        advance(sim, half_macro);
        const MsdSample b = msd.record(sim);
        const double h = 0.5 * opt.micro_time;
        sx[r] = (b.x2 - a.x2) / (2.0 * h);
        sy[r] = (b.y2 - a.y2) / (2.0 * h);
        raw[r] = b.x2 / opt.micro_time;
        const auto counts = box_counts(sim.config, 2);
        double e = 0.0;
        for (int s : sim.config.particles()) e += (counts[s] - 1) / 24.0;
        env[r] = e / static_cast<double>(sim.config.particle_count());
      },
      opt.workers);
  std::vector<double> both(opt.replicas);
  for (int r = 0; r < opt.replicas; ++r) both[r] = 0.5 * (sx[r] + sy[r]);
  std::tie(out.value, out.stderr_) = detail::jackknife_mean(both);
  std::tie(out.x, out.x_stderr) = detail::jackknife_mean(sx);
  std::tie(out.y, out.y_stderr) = detail::jackknife_mean(sy);
  out.raw_per_t = detail::jackknife_mean(raw).first;
  std::tie(out.env_density, out.env_stderr) = detail::jackknife_mean(env);
  return out;
}

/// Weighted isotonic regression onto nonincreasing sequences (pool adjacent violators).
inline std::vector<double> isotonic_nonincreasing(const std::vector<double>& y, const std::vector<double>& w) {
  if (y.size() != w.size()) throw std::invalid_argument("isotonic regression: size mismatch");
  struct Block {
    double value, weight;
    std::size_t len;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(w[i] > 0.0)) throw std::invalid_argument("isotonic regression: weights must be positive");
    blocks.push_back({y[i], w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value < blocks.back().value) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      a.value = (a.value * a.weight + b.value * b.weight) / (a.weight + b.weight);
      a.weight += b.weight;
      a.len += b.len;
    }
  }
  std::vector<double> out;
  for (const auto& b : blocks) out.insert(out.end(), b.len, b.value);
  return out;
}

/// Tabulated d_s with a monotone C^1 interpolant (Fritsch-Carlson PCHIP).
/// Endpoint values d_s(0) = 1 and d_s(1) = 0 are pinned.
class DsTable {
 public:
  DsTable() = default;

  /// `rho` strictly increasing from 0 to 1; `stderr_` > 0 on interior nodes.
  static DsTable from_estimates(std::vector<double> rho, std::vector<double> raw, std::vector<double> stderr_) {
    const std::size_t n = rho.size();
    if (n < 2 || raw.size() != n || stderr_.size() != n) throw std::invalid_argument("DsTable: mismatched columns");
    if (rho.front() != 0.0 || rho.back() != 1.0) throw std::invalid_argument("DsTable: grid must include 0 and 1");
    for (std::size_t i = 1; i < n; ++i)
      if (!(rho[i] > rho[i - 1])) throw std::invalid_argument("DsTable: grid must be strictly increasing");
    DsTable t;
    t.rho_ = std::move(rho);
    t.raw_ = std::move(raw);
    t.stderr_ = std::move(stderr_);
    std::vector<double> y = t.raw_, w(n);
    y.front() = 1.0;
    y.back() = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool pinned = i == 0 || i + 1 == n;
      const double se = t.stderr_[i];
      w[i] = pinned ? 1e30 : (se > 0.0 && std::isfinite(se) ? 1.0 / (se * se) : 1.0);
    }
    t.fit_ = isotonic_nonincreasing(y, w);
    t.fit_.front() = 1.0;
    t.fit_.back() = 0.0;
    for (auto& v : t.fit_) v = std::clamp(v, 0.0, 1.0);
    t.build_slopes();
    return t;
  }

  /// Table from exact values (no noise); still projected and pinned.
  static DsTable from_values(std::vector<double> rho, std::vector<double> values) {
    std::vector<double> se(rho.size(), 1.0);
    return from_estimates(std::move(rho), std::move(values), std::move(se));
  }

  bool empty() const noexcept { return rho_.empty(); }
  const std::vector<double>& grid() const noexcept { return rho_; }
  const std::vector<double>& raw() const noexcept { return raw_; }
  const std::vector<double>& stderrs() const noexcept { return stderr_; }
  const std::vector<double>& fitted() const noexcept { return fit_; }

  double ds(double rho) const {
    const auto [i, t, h] = locate(rho);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * fit_[i] + (t3 - 2 * t2 + t) * h * slope_[i] + (-2 * t3 + 3 * t2) * fit_[i + 1] +
           (t3 - t2) * h * slope_[i + 1];
  }

  double ds_prime(double rho) const {
    const auto [i, t, h] = locate(rho);
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * fit_[i] + (3 * t2 - 4 * t + 1) * h * slope_[i] + (-6 * t2 + 6 * t) * fit_[i + 1] +
            (3 * t2 - 2 * t) * h * slope_[i + 1]) /
           h;
  }

  /// Smallest C with (1/C)(1 - rho) <= d_s(rho) <= C (1 - rho) on grid nodes with rho < 1.
  double bound_constant() const {
    require();
    double c = 1.0;
    for (std::size_t i = 0; i + 1 < rho_.size(); ++i) {
      const double q = fit_[i] / (1.0 - rho_[i]);
      if (!(q > 0.0)) return std::numeric_limits<double>::infinity();
      c = std::max({c, q, 1.0 / q});
    }
    return c;
  }

  void save(const std::filesystem::path& csv, const nlohmann::json& sidecar = nlohmann::json::object()) const {
    require();
    std::ofstream os(csv);
    if (!os) throw std::runtime_error("cannot write " + csv.string());
    os << "rho,estimate,stderr,fitted\n" << std::setprecision(17);
    for (std::size_t i = 0; i < rho_.size(); ++i) os << rho_[i] << ',' << raw_[i] << ',' << stderr_[i] << ',' << fit_[i] << '\n';
    nlohmann::json side = sidecar;
    side["normalization"] = "d_s = lim MSD_1(t) / (2 t), microscopic time; d_s(0) = 1";
    side["interpolant"] = "isotonic projection, pinned endpoints, monotone cubic Hermite (Fritsch-Carlson)";
    side["bound_constant"] = bound_constant();
    std::ofstream js(csv.string() + ".json");
    js << side.dump(2) << '\n';
  }

  static DsTable load(const std::filesystem::path& csv) {
    std::ifstream is(csv);
    if (!is) throw std::runtime_error("cannot read d_s table " + csv.string());
    std::string line;
    std::getline(is, line);
    std::vector<double> rho, est, se;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> row;
      while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
      if (row.size() < 3) throw std::runtime_error("malformed d_s table row: " + line);
      rho.push_back(row[0]);
      est.push_back(row[1]);
      se.push_back(row[2]);
    }
    return from_estimates(std::move(rho), std::move(est), std::move(se));
  }

 private:
  void require() const {
    if (empty()) throw std::logic_error("d_s table queried before construction");
  }

  struct Where {
    std::size_t i;
    double t, h;
  };

  Where locate(double rho) const {
    require();
    rho = std::clamp(rho, 0.0, 1.0);
    std::size_t i = static_cast<std::size_t>(std::upper_bound(rho_.begin(), rho_.end(), rho) - rho_.begin());
    i = std::clamp<std::size_t>(i, 1, rho_.size() - 1) - 1;
    const double h = rho_[i + 1] - rho_[i];
    return {i, (rho - rho_[i]) / h, h};
  }

  void build_slopes() {
    const std::size_t n = rho_.size();
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (fit_[i + 1] - fit_[i]) / (rho_[i + 1] - rho_[i]);
    slope_.assign(n, 0.0);
    if (n == 2) {
      slope_[0] = slope_[1] = delta[0];
      return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) continue;
      const double h0 = rho_[i] - rho_[i - 1], h1 = rho_[i + 1] - rho_[i];
      const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
      slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (s * d0 <= 0.0) return 0.0;
      if (d0 * d1 <= 0.0 && std::abs(s) > 3 * std::abs(d0)) return 3 * d0;
      return s;
    };
    slope_[0] = end_slope(rho_[1] - rho_[0], rho_[2] - rho_[1], delta[0], delta[1]);
    slope_[n - 1] = end_slope(rho_[n - 1] - rho_[n - 2], rho_[n - 2] - rho_[n - 3], delta[n - 2], delta[n - 3]);
  }

  std::vector<double> rho_, raw_, stderr_, fit_, slope_;
};

/// Runs estimate_ds on every grid node. Nodes 0 and 1 are estimated too
/// (0 as a free-walk check, 1 returns 0) and then pinned by the table.
inline std::pair<DsTable, std::vector<DsEstimate>> build_ds_table(const std::vector<double>& grid, const DsRunOptions& opt,
                                                                  int low_density_replicas = 0) {
  std::vector<DsEstimate> est;
  std::vector<double> raw, se;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    DsRunOptions o = opt;
    o.seed = derive_seed(opt.seed, "ds-node", i);
    if (grid[i] == 0.0 && low_density_replicas > 0) o.replicas = low_density_replicas;
    est.push_back(estimate_ds(grid[i], o));
    raw.push_back(est.back().value);
    se.push_back(est.back().stderr_);
  }
  return {DsTable::from_estimates(grid, raw, se), est};
}

}  // namespace aep
