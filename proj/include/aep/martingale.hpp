#pragma once

// M_t = <pi_t, H> - <pi_0, H> - int_0^t L_N <pi_s, H> ds for a time-independent
// H(u, theta) = G(u) omega(theta). L_N <pi, H> is a sum of per-particle terms
// that only depend on the particle and its four neighbors, so it is kept up to
// date in O(1) per event and integrated exactly over holding times.

#include <functional>
#include <utility>
#include <vector>

#include "aep/dynamics.hpp"
#include "aep/generator.hpp"

namespace aep {

class MartingaleTracker {
 public:
  using SpaceFunction = std::function<double(double, double)>;

  MartingaleTracker(const SimulationState& sim, SpaceFunction G, AngleFunction omega, int quadrature_order = 256)
      : G_(std::move(G)), omega_(std::move(omega)), quadrature_(quadrature_order), term_(sim.config.site_count(), 0.0) {
    const double h = kTwoPi / quadrature_;
    for (int q = 0; q < quadrature_; ++q) omega_mean_ += omega_(h * q);
    omega_mean_ /= quadrature_;
    for (int s = 0; s < static_cast<int>(term_.size()); ++s) refresh(sim, s);
    initial_pairing_ = pairing(sim.config);
  }

  /// <pi^N, H> = N^{-2} sum_x eta_x H(x/N, theta_x).
  double pairing(const Configuration& c) const {
    const double n = c.side();
    double acc = 0.0;
    for (int s : c.particles()) {
      const Site p = c.geometry().coords(s);
      acc += G_(p.x / n, p.y / n) * omega_(c.angle(s));
    }
    return acc / (n * n);
  }

  /// L_N <pi^N, H> recomputed from scratch.
  double drift(const SimulationState& sim) const {
    double acc = 0.0;
    for (int s : sim.config.particles()) acc += site_term(sim, s);
    return acc;
  }

  double tracked_drift() const noexcept { return drift_total_; }
  double integral() const noexcept { return integral_; }
  double value(const SimulationState& sim) const { return pairing(sim.config) - initial_pairing_ - integral_; }

  void elapsed(const SimulationState&, double dt) { integral_ += drift_total_ * dt; }

  void exchanged(const SimulationState& sim, int from, int to) {
    refresh_with_neighbors(sim, from);
    refresh_with_neighbors(sim, to);
  }

  void flipped(const SimulationState& sim, int site, double) { refresh_with_neighbors(sim, site); }

 private:
  double H(const Configuration& c, int site, double theta) const {
    const double n = c.side();
    const Site p = c.geometry().coords(site);
    return G_(p.x / n, p.y / n) * omega_(theta);
  }

  double site_term(const SimulationState& sim, int x) const {
    const Configuration& c = sim.config;
    const ModelParams& p = sim.params;
    const double n = p.N;
    const double theta = c.angle(x);
    const double here = H(c, x, theta);
    double acc = 0.0;
    for (int axis = 0; axis < 2; ++axis)
      for (int dir = -1; dir <= 1; dir += 2) {
        const int y = c.geometry().neighbor(x, axis, dir);
        if (y == x || c.occupied(y)) continue;
        const double rate = n * n * (1.0 + dir * drift_component(p.lambda, theta, axis, p.angles) / n);
        acc += rate * (H(c, y, theta) - here);
      }
    acc += glauber_term(sim, x, theta);
    return acc / (n * n);
  }

  double glauber_term(const SimulationState& sim, int x, double theta) const {
    const Configuration& c = sim.config;
    const ModelParams& p = sim.params;
    const double n = c.side();
    const Site pos = c.geometry().coords(x);
    const double gx = G_(pos.x / n, pos.y / n);
    double mean;
    if (p.angles == AngleModel::two_type) {
      const double up = two_type_up_probability(two_type_field(c, x), p.beta);
      mean = up * omega_(0.0) + (1.0 - up) * omega_(kPi);
    } else if (p.beta == 0.0) {
      mean = omega_mean_;
    } else {
      const Resultant r = neighbor_resultant(c, x);
      const double kappa = p.beta * r.norm(), phi = r.direction();
      const double h = kTwoPi / quadrature_;
      mean = 0.0;
      for (int q = 0; q < quadrature_; ++q) mean += von_mises_density(h * q, phi, kappa) * omega_(h * q);
      mean *= h;
    }
    return gx * (mean - omega_(theta));
  }

  void refresh(const SimulationState& sim, int site) {
    const double fresh = sim.config.occupied(site) ? site_term(sim, site) : 0.0;
    drift_total_ += fresh - term_[site];
    term_[site] = fresh;
  }

  void refresh_with_neighbors(const SimulationState& sim, int site) {
    refresh(sim, site);
    const auto& g = sim.config.geometry();
    for (int axis = 0; axis < 2; ++axis)
      for (int dir = -1; dir <= 1; dir += 2) refresh(sim, g.neighbor(site, axis, dir));
  }

  SpaceFunction G_;
  AngleFunction omega_;
  int quadrature_;
  double omega_mean_ = 0.0;
  std::vector<double> term_;
  double drift_total_ = 0.0;
  double integral_ = 0.0;
  double initial_pairing_ = 0.0;
};

}  // namespace aep
