#pragma once

// Finite-volume solver for
//   d_t rho-hat = div[ d(rho-hat) grad rho + d_s(rho) grad rho-hat ]
//               - 2 lambda div[ s(rho-hat) Omega + d_s(rho) rho-hat e(theta) ] + Gamma(rho-hat)
// on an L x L periodic grid with M angle bins. Unknowns are bin masses per
// unit area. Cell (i, j) has index i + L j and centre ((i + 1/2)/L, (j + 1/2)/L).
//
// Face fluxes are centred averages of the cell coefficients, so the update is
// conservative and the bin sum obeys the discrete heat equation exactly at
// lambda = 0 (uses d_s(0) = 1).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aep/angle_measure.hpp"
#include "aep/angles.hpp"
#include "aep/dynamics.hpp"
#include "aep/glauber.hpp"
#include "aep/observables.hpp"
#include "aep/rng.hpp"
#include "aep/sampling.hpp"
#include "aep/selfdiff.hpp"

namespace aep {

struct AngularDensityField {
  int L = 0;
  int M = 0;
  double time = 0.0;
  std::vector<double> data;  // index cell * M + k

  AngularDensityField() = default;
  AngularDensityField(int side, int bins) : L(side), M(bins), data(static_cast<std::size_t>(side) * side * bins, 0.0) {
    if (side < 3 || bins < 1) throw std::invalid_argument("field needs L >= 3 and M >= 1");
  }

  std::size_t cells() const noexcept { return static_cast<std::size_t>(L) * L; }
  double h() const noexcept { return 1.0 / L; }
  double& at(std::size_t cell, int k) { return data[cell * M + k]; }
  double at(std::size_t cell, int k) const { return data[cell * M + k]; }
  const double* cell_ptr(std::size_t cell) const { return data.data() + cell * M; }

  double rho(std::size_t cell) const {
    double s = 0.0;
    for (int k = 0; k < M; ++k) s += at(cell, k);
    return s;
  }

  /// int rho du.
  double total_mass() const {
    double s = 0.0;
    for (double v : data) s += v;
    return s / (static_cast<double>(L) * L);
  }

  double min_value() const { return data.empty() ? 0.0 : *std::min_element(data.begin(), data.end()); }
  double max_density() const {
    double m = 0.0;
    for (std::size_t c = 0; c < cells(); ++c) m = std::max(m, rho(c));
    return m;
  }
};

/// (cos, sin) of the bin centre 2 pi k / M, exact on the axes.
inline std::array<double, 2> bin_direction(int M, int k) {
  const int q = ((k % M) + M) % M;
  if ((4 * q) % M == 0) {
    static constexpr std::array<std::array<double, 2>, 4> axes{{{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}}};
    return axes[(4 * q) / M];
  }
  const double a = kTwoPi * q / M;
  return {std::cos(a), std::sin(a)};
}

/// Bin masses of the local law at every cell centre.
inline AngularDensityField initial_field(const InitialProfile& profile, int L, int M) {
  AngularDensityField f(L, M);
  const AngleBins bins(M);
  for (int j = 0; j < L; ++j)
    for (int i = 0; i < L; ++i) {
      const auto w = profile.at((i + 0.5) / L, (j + 0.5) / L).binned(bins);
      const std::size_t cell = static_cast<std::size_t>(i) + static_cast<std::size_t>(L) * j;
      for (int k = 0; k < M; ++k) f.at(cell, k) = w[k];
    }
  return f;
}

// ---- local coefficients -------------------------------------------------

/// d = (rho-hat / rho)(1 - d_s(rho)); zero at rho = 0.
inline std::vector<double> coeff_d(std::span<const double> rho_hat, double rho, double ds_value) {
  std::vector<double> out(rho_hat.size(), 0.0);
  if (rho <= 0.0) return out;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = rho_hat[k] / rho * (1.0 - ds_value);
  return out;
}

/// s = (rho-hat / rho)(1 - rho - d_s(rho)); zero at rho = 0.
inline std::vector<double> coeff_s(std::span<const double> rho_hat, double rho, double ds_value) {
  std::vector<double> out(rho_hat.size(), 0.0);
  if (rho <= 0.0) return out;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = rho_hat[k] / rho * (1.0 - rho - ds_value);
  return out;
}

/// Midpoint moment sum_k rho-hat_k (cos, sin)(theta_k).
inline std::array<double, 2> omega_vector(std::span<const double> rho_hat) {
  const int M = static_cast<int>(rho_hat.size());
  std::array<double, 2> o{0.0, 0.0};
  for (int k = 0; k < M; ++k) {
    const auto e = bin_direction(M, k);
    o[0] += rho_hat[k] * e[0];
    o[1] += rho_hat[k] * e[1];
  }
  return o;
}

struct CreationRate {
  std::vector<double> values;
  std::vector<double> stderrs;  // zero for exact evaluations
};

namespace detail {

inline void project_zero_sum(std::vector<double>& g) {
  double s = 0.0;
  for (double v : g) s += v;
  const double shift = s / static_cast<double>(g.size());
  for (double& v : g) v -= shift;
}

/// Bin integrals of the von Mises density, renormalized to sum to one.
inline void von_mises_bin_masses(const AngleBins& bins, double location, double concentration, std::vector<double>& out) {
  static constexpr std::array<double, 8> x{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                           -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                           0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> w{0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                           0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};
  const int M = bins.count();
  out.assign(M, 0.0);
  if (concentration < 1e-12) {
    std::fill(out.begin(), out.end(), 1.0 / M);
    return;
  }
  double total = 0.0;
  const double half = 0.5 * bins.width();
  for (int k = 0; k < M; ++k) {
    const double mid = bins.center(k);
    double acc = 0.0;
    for (int q = 0; q < 8; ++q) acc += w[q] * std::exp(concentration * (std::cos(mid + half * x[q] - location) - 1.0));
    out[k] = acc;
    total += acc;
  }
  for (double& v : out) v /= total;
}

inline double multinomial4(int a, int b, int c) {
  static constexpr std::array<double, 5> fact{1, 1, 2, 6, 24};
  return 24.0 / (fact[a] * fact[b] * fact[c]);
}

}  // namespace detail

/// Exact two-type creation rate (bins 0 and pi), enumerating the neighbour counts.
inline CreationRate creation_rate_two_type(double plus, double minus, double beta) {
  const double rho = plus + minus;
  const double empty = std::max(0.0, 1.0 - rho);
  double up = 0.0;
  for (int np = 0; np <= 4; ++np)
    for (int nm = 0; nm + np <= 4; ++nm) {
      const int n0 = 4 - np - nm;
      const double pr = detail::multinomial4(np, nm, n0) * std::pow(plus, np) * std::pow(minus, nm) * std::pow(empty, n0);
      up += pr * two_type_up_probability(np - nm, beta);
    }
  CreationRate g{{rho * up - plus, rho * (1.0 - up) - minus}, {0.0, 0.0}};
  detail::project_zero_sum(g.values);
  return g;
}

/// Monte Carlo estimate of the two-type creation rate (cross-check of the enumeration).
inline CreationRate creation_rate_two_type_mc(double plus, double minus, double beta, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("creation rate needs at least one sample");
  Rng rng = make_stream(seed, "gamma-quadrature");
  const double rho = plus + minus;
  double s1 = 0.0, s2 = 0.0;
  for (int n = 0; n < samples; ++n) {
    int field = 0;
    for (int j = 0; j < 4; ++j) {
      const double u = uniform01(rng);
      field += u < plus ? 1 : (u < rho ? -1 : 0);
    }
    const double p = two_type_up_probability(field, beta);
    s1 += p;
    s2 += p * p;
  }
  const double mean = s1 / samples;
  const double var = std::max(0.0, s2 / samples - mean * mean);
  const double se = rho * std::sqrt(var / samples);
  CreationRate g{{rho * mean - plus, rho * (1.0 - mean) - minus}, {se, se}};
  detail::project_zero_sum(g.values);
  return g;
}

/// Gamma_k = rho E[ int_{bin k} c_{0,beta}(theta, .) d theta ] - rho-hat_k.
///   beta = 0: closed form rho / M - rho-hat_k.
///   two-type (M = 2): exact enumeration.
///   continuum: Monte Carlo over the four neighbours with a fixed seed, so the
///   map rho-hat -> Gamma is deterministic; neighbour angles are uniform within
///   their bin and each draw contributes exact von Mises bin masses.
inline CreationRate creation_rate(std::span<const double> rho_hat, double beta, AngleModel model, int samples,
                                  std::uint64_t seed) {
  const int M = static_cast<int>(rho_hat.size());
  double rho = 0.0;
  for (double v : rho_hat) rho += v;
  if (samples < 1) throw std::invalid_argument("creation rate needs at least one sample");
  if (model == AngleModel::two_type) {
    if (M != 2) throw std::invalid_argument("two-type creation rate needs M = 2");
    return creation_rate_two_type(rho_hat[0], rho_hat[1], beta);
  }
  CreationRate g{std::vector<double>(M), std::vector<double>(M, 0.0)};
  if (beta == 0.0 || rho <= 0.0) {
    for (int k = 0; k < M; ++k) g.values[k] = rho / M - rho_hat[k];
    detail::project_zero_sum(g.values);
    return g;
  }
  const AngleBins bins(M);
  std::vector<double> cdf(M);
  double run = 0.0;
  for (int k = 0; k < M; ++k) cdf[k] = (run += rho_hat[k] / rho);
  Rng rng = make_stream(seed, "gamma-quadrature");
  std::vector<double> s1(M, 0.0), s2(M, 0.0), masses;
  for (int n = 0; n < samples; ++n) {
    double rx = 0.0, ry = 0.0;
    for (int j = 0; j < 4; ++j) {
      if (uniform01(rng) >= rho) continue;
      const double u = uniform01(rng);
      const int b = std::min<int>(M - 1, static_cast<int>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin()));
      const double a = bins.lower_edge(b) + bins.width() * uniform01(rng);
      rx += std::cos(a);
      ry += std::sin(a);
    }
    const double R = std::hypot(rx, ry);
    detail::von_mises_bin_masses(bins, R > 0.0 ? std::atan2(ry, rx) : 0.0, beta * R, masses);
    for (int k = 0; k < M; ++k) {
      s1[k] += masses[k];
      s2[k] += masses[k] * masses[k];
    }
  }
  for (int k = 0; k < M; ++k) {
    const double mean = s1[k] / samples;
    g.values[k] = rho * mean - rho_hat[k];
    g.stderrs[k] = rho * std::sqrt(std::max(0.0, s2[k] / samples - mean * mean) / samples);
  }
  detail::project_zero_sum(g.values);
  return g;
}

// ---- solver ---------------------------------------------------------------

enum class TimeScheme { euler, heun };

struct PdeConfig {
  int L = 64;
  int M = 8;
  double dt = 0.0;  // 0 selects 0.8 of the stability bound, rounded so T/dt is an integer
  double lambda = 0.0;
  double beta = 0.0;
  double T = 0.0;
  std::string ds_path;
  int gamma_samples = 2048;
  bool limiter = true;
  TimeScheme scheme = TimeScheme::euler;
  AngleModel model = AngleModel::continuum;
  std::uint64_t seed = 1;
  double cfl = 0.25;

  /// c h^2 / max(1, 2 lambda h): diffusion coefficients are at most 1 and the
  /// drift speed at most 2 lambda.
  double dt_max() const {
    const double h = 1.0 / L;
    return cfl * h * h / std::max(1.0, 2.0 * lambda * h);
  }

  double resolved_dt() const {
    if (dt > 0.0) return dt;
    if (T <= 0.0) return 0.8 * dt_max();
    const double n = std::ceil(T / (0.8 * dt_max()) - 1e-9);
    return T / n;
  }

  void validate() const {
    if (L < 3) throw std::invalid_argument("pde: L must be at least 3");
    if (M < 1) throw std::invalid_argument("pde: M must be positive");
    if (model == AngleModel::two_type && M != 2) throw std::invalid_argument("pde: the two-type model needs M = 2");
    if (!(lambda >= 0.0) || !(beta >= 0.0) || !(T >= 0.0)) throw std::invalid_argument("pde: lambda, beta, T must be nonnegative");
    if (gamma_samples < 1) throw std::invalid_argument("pde: gamma_samples must be positive");
    if (!(cfl > 0.0)) throw std::invalid_argument("pde: cfl must be positive");
    if (resolved_dt() > dt_max() * (1.0 + 1e-12))
      throw std::invalid_argument("pde: dt = " + std::to_string(resolved_dt()) + " violates the stability bound " +
                                  std::to_string(dt_max()));
  }
};

struct StepReport {
  std::uint64_t limited_cells = 0;  // (cell, bin) pairs whose outflow was scaled
  std::uint64_t clamped = 0;        // bins set to zero after falling below -1e-10
  double clamp_mass = 0.0;          // mass added by clamping (per unit area)
};

class PdeSolver {
 public:
  PdeSolver(PdeConfig cfg, DsTable table) : cfg_(std::move(cfg)), table_(std::move(table)) {
    cfg_.validate();
    if (table_.empty()) throw std::invalid_argument("pde: d_s table is empty");
  }

  const PdeConfig& config() const noexcept { return cfg_; }
  const DsTable& table() const noexcept { return table_; }
  double dt() const { return cfg_.resolved_dt(); }

  /// Gamma for one cell (bin masses in, per-bin rates out).
  std::vector<double> gamma(std::span<const double> rho_hat) const {
    return creation_rate(rho_hat, cfg_.beta, cfg_.model, cfg_.gamma_samples, cfg_.seed).values;
  }

  /// Time derivative of every bin. With `limit_dt` > 0 the outgoing face
  /// fluxes of (cell, bin) pairs that would turn negative are scaled down.
  std::uint64_t tendency(const AngularDensityField& f, std::vector<double>& out, double limit_dt) const {
    check(f);
    const int L = f.L, M = f.M;
    const std::size_t C = f.cells();
    const double inv_h = static_cast<double>(L);
    rho_.resize(C);
    ds_.resize(C);
    dcoef_.resize(C * M);
    drift_x_.resize(C * M);
    drift_y_.resize(C * M);
    gamma_.resize(C * M);
    for (std::size_t c = 0; c < C; ++c) {
      const std::span<const double> rh(f.cell_ptr(c), M);
      double r = 0.0;
      for (double v : rh) r += v;
      rho_[c] = r;
      const double d = table_.ds(r);
      ds_[c] = d;
      const auto om = omega_vector(rh);
      for (int k = 0; k < M; ++k) {
        const double frac = r > 0.0 ? rh[k] / r : 0.0;
        const double s = frac * (1.0 - r - d);
        const auto e = bin_direction(M, k);
        dcoef_[c * M + k] = frac * (1.0 - d);
        drift_x_[c * M + k] = 2.0 * cfg_.lambda * (s * om[0] + d * rh[k] * e[0]);
        drift_y_[c * M + k] = 2.0 * cfg_.lambda * (s * om[1] + d * rh[k] * e[1]);
      }
      const auto g = gamma(rh);
      for (int k = 0; k < M; ++k) gamma_[c * M + k] = g[k];
    }
    // Net outward flux through the +x and +y faces of each cell.
    jx_.resize(C * M);
    jy_.resize(C * M);
    for (int j = 0; j < L; ++j)
      for (int i = 0; i < L; ++i) {
        const std::size_t c = idx(i, j, L);
        const std::size_t nx = idx(i + 1, j, L), ny = idx(i, j + 1, L);
        face(f, c, nx, inv_h, drift_x_, jx_);
        face(f, c, ny, inv_h, drift_y_, jy_);
      }
    std::uint64_t limited = 0;
    if (limit_dt > 0.0) limited = limit(f, limit_dt, inv_h);
    out.resize(C * M);
    for (int j = 0; j < L; ++j)
      for (int i = 0; i < L; ++i) {
        const std::size_t c = idx(i, j, L), wx = idx(i - 1, j, L), wy = idx(i, j - 1, L);
        for (int k = 0; k < M; ++k)
          out[c * M + k] = -(jx_[c * M + k] - jx_[wx * M + k] + jy_[c * M + k] - jy_[wy * M + k]) * inv_h + gamma_[c * M + k];
      }
    return limited;
  }

  StepReport step(AngularDensityField& f) const {
    StepReport rep;
    const double dt = this->dt();
    const double lim = cfg_.limiter ? dt : 0.0;
    rep.limited_cells += tendency(f, k1_, lim);
    if (cfg_.scheme == TimeScheme::euler) {
      for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] += dt * k1_[i];
    } else {
      stage_ = f;
      for (std::size_t i = 0; i < f.data.size(); ++i) stage_.data[i] += dt * k1_[i];
      rep.limited_cells += tendency(stage_, k2_, lim);
      for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = 0.5 * (f.data[i] + stage_.data[i] + dt * k2_[i]);
    }
    f.time += dt;
    const double area = 1.0 / (static_cast<double>(f.L) * f.L);
    for (double& v : f.data)
      if (v < -1e-10) {
        rep.clamp_mass -= v * area;
        v = 0.0;
        ++rep.clamped;
      }
    return rep;
  }

  struct Result {
    AngularDensityField field;
    std::uint64_t steps = 0;
    StepReport totals;
    double min_value = 0.0;  // smallest bin value seen after any step
  };

  /// Integrates to cfg.T; `on_step(field)` runs after the initial state and every step.
  Result solve(AngularDensityField f, const std::function<void(const AngularDensityField&)>& on_step = {}) const {
    Result res;
    res.min_value = f.min_value();
    if (on_step) on_step(f);
    const double dt = this->dt();
    const auto n = static_cast<std::uint64_t>(std::llround(cfg_.T / dt));
    const double t0 = f.time;
    for (std::uint64_t s = 0; s < n; ++s) {
      const StepReport r = step(f);
      f.time = t0 + (s + 1) * dt;
      res.totals.limited_cells += r.limited_cells;
      res.totals.clamped += r.clamped;
      res.totals.clamp_mass += r.clamp_mass;
      res.min_value = std::min(res.min_value, f.min_value());
      ++res.steps;
      if (on_step) on_step(f);
    }
    res.field = std::move(f);
    return res;
  }

 private:
  static std::size_t idx(int i, int j, int L) {
    i = (i % L + L) % L;
    j = (j % L + L) % L;
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(L) * j;
  }

  void check(const AngularDensityField& f) const {
    if (f.L != cfg_.L || f.M != cfg_.M) throw std::invalid_argument("pde: field grid does not match the configuration");
  }

  void face(const AngularDensityField& f, std::size_t c, std::size_t n, double inv_h, const std::vector<double>& drift,
            std::vector<double>& J) const {
    const int M = f.M;
    const double grad_rho = (rho_[n] - rho_[c]) * inv_h;
    const double ds_face = 0.5 * (ds_[c] + ds_[n]);
    for (int k = 0; k < M; ++k) {
      const double diff = 0.5 * (dcoef_[c * M + k] + dcoef_[n * M + k]) * grad_rho +
                          ds_face * (f.at(n, k) - f.at(c, k)) * inv_h;
      J[c * M + k] = 0.5 * (drift[c * M + k] + drift[n * M + k]) - diff;
    }
  }

  std::uint64_t limit(const AngularDensityField& f, double dt, double inv_h) const {
    const int L = f.L, M = f.M;
    const std::size_t C = f.cells();
    scale_.assign(C * M, 1.0);
    std::uint64_t limited = 0;
    for (int j = 0; j < L; ++j)
      for (int i = 0; i < L; ++i) {
        const std::size_t c = idx(i, j, L), wx = idx(i - 1, j, L), wy = idx(i, j - 1, L);
        for (int k = 0; k < M; ++k) {
          const std::size_t a = c * M + k;
          const double out = std::max(jx_[a], 0.0) + std::max(jy_[a], 0.0) + std::max(-jx_[wx * M + k], 0.0) +
                             std::max(-jy_[wy * M + k], 0.0);
          const double avail = f.data[a] + dt * std::min(gamma_[a], 0.0);
          const double loss = dt * out * inv_h;
          if (loss > avail && loss > 0.0) {
            scale_[a] = std::max(0.0, avail) / loss;
            ++limited;
          }
        }
      }
    if (limited == 0) return 0;
    for (int j = 0; j < L; ++j)
      for (int i = 0; i < L; ++i) {
        const std::size_t c = idx(i, j, L), ex = idx(i + 1, j, L), ey = idx(i, j + 1, L);
        for (int k = 0; k < M; ++k) {
          const std::size_t a = c * M + k;
          jx_[a] *= jx_[a] > 0.0 ? scale_[a] : scale_[ex * M + k];
          jy_[a] *= jy_[a] > 0.0 ? scale_[a] : scale_[ey * M + k];
        }
      }
    return limited;
  }

  PdeConfig cfg_;
  DsTable table_;
  mutable std::vector<double> rho_, ds_, dcoef_, drift_x_, drift_y_, gamma_, jx_, jy_, scale_, k1_, k2_;
  mutable AngularDensityField stage_;
};

/// Averages the PDE field onto a grid x grid coarse grid (L divisible by grid).
inline FieldSnapshot to_snapshot(const AngularDensityField& f, int grid) {
  if (grid < 1 || f.L % grid != 0) throw std::invalid_argument("to_snapshot: grid must divide L");
  FieldSnapshot s;
  s.time = f.time;
  s.N = 0;
  s.grid = grid;
  s.block = f.L / grid;
  s.epsilon = 1.0 / (2.0 * grid);
  s.bins = AngleBins(f.M);
  s.allocate();
  const int b = f.L / grid;
  const double inv = 1.0 / (static_cast<double>(b) * b);
  for (int j = 0; j < f.L; ++j)
    for (int i = 0; i < f.L; ++i) {
      const std::size_t c = static_cast<std::size_t>(i) + static_cast<std::size_t>(f.L) * j;
      const std::size_t cell = static_cast<std::size_t>(i / b) + static_cast<std::size_t>(grid) * (j / b);
      for (int k = 0; k < f.M; ++k) {
        const auto e = bin_direction(f.M, k);
        s.bin(cell, k) += f.at(c, k) * inv;
        s.mag_x[cell] += f.at(c, k) * e[0] * inv;
        s.mag_y[cell] += f.at(c, k) * e[1] * inv;
      }
    }
  s.recompute_mass();
  return s;
}

/// Discrete Dirichlet energy (1/2) int |grad rho|^2 du, a regularity diagnostic.
inline double dirichlet_energy(const AngularDensityField& f) {
  const int L = f.L;
  double e = 0.0;
  for (int j = 0; j < L; ++j)
    for (int i = 0; i < L; ++i) {
      const std::size_t c = static_cast<std::size_t>(i) + static_cast<std::size_t>(L) * j;
      const double r = f.rho(c);
      const double rx = f.rho(static_cast<std::size_t>((i + 1) % L) + static_cast<std::size_t>(L) * j);
      const double ry = f.rho(static_cast<std::size_t>(i) + static_cast<std::size_t>(L) * ((j + 1) % L));
      e += (rx - r) * (rx - r) + (ry - r) * (ry - r);
    }
  return 0.5 * e;  // the h^2 of the area and 1/h^2 of the gradient cancel
}

}  // namespace aep
