#pragma once

// Continuous-time simulation of L_N = N^2 (L + L^WA / N) + L^G by thinning.
//
// Every particle proposes events at the constant rate 4 N^2 (1 + lambda/N) + 1.
// An exchange proposal picks one of the four directions uniformly; it is
// cancelled if the target is occupied and otherwise accepted with probability
// (1 + delta lambda_i(theta)/N) / (1 + lambda/N). The remaining rate 1 is an
// alignment event that redraws the angle from c_{x,beta}. The realized jump
// rates are exactly N^2 (1 + delta lambda_i(theta)/N) and 1, so the process
// has generator L_N. Time is macroscopic; the N^2 lives in the rates.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "aep/configuration.hpp"
#include "aep/glauber.hpp"
#include "aep/rng.hpp"

namespace aep {

enum class AngleModel { continuum, two_type };

struct ModelParams {
  int N = 32;
  double lambda = 0.0;
  double beta = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t max_event_budget = std::numeric_limits<std::uint64_t>::max();
  AngleModel angles = AngleModel::continuum;

  void validate() const {
    if (N < 1) throw std::invalid_argument("N must be positive");
    if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be nonnegative");
    if (lambda > N) throw std::invalid_argument("lambda must not exceed N (displacement rates would be negative)");
    if (!(beta >= 0.0)) throw std::invalid_argument("beta must be nonnegative");
    if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
  }
};

/// lambda_1(theta) = lambda cos(theta), lambda_2(theta) = lambda sin(theta).
/// Two-type angles are exactly 0 or pi and get exact components.
inline double drift_component(double lambda, double theta, int axis, AngleModel model) noexcept {
  if (model == AngleModel::two_type) return axis == 0 ? (theta == 0.0 ? lambda : -lambda) : 0.0;
  return axis == 0 ? lambda * std::cos(theta) : lambda * std::sin(theta);
}

/// Rate at which the particle at `site` jumps one step along `axis` in
/// direction `dir`: N^2 (1 + dir lambda_i(theta)/N), or 0 if the target is occupied.
inline double jump_rate(const Configuration& c, int site, int axis, int dir, const ModelParams& p) {
  if (!c.occupied(site)) throw std::invalid_argument("jump_rate: site " + std::to_string(site) + " is empty");
  if (c.occupied(c.geometry().neighbor(site, axis, dir))) return 0.0;
  const double n = p.N;
  return n * n * (1.0 + dir * drift_component(p.lambda, c.angle(site), axis, p.angles) / n);
}

struct EventCounters {
  std::uint64_t events = 0;
  std::uint64_t exchange_attempts = 0;
  std::uint64_t exchanges = 0;
  std::uint64_t blocked = 0;  // cancelled by the exclusion rule
  std::uint64_t thinned = 0;  // rejected by the drift acceptance step
  std::uint64_t flips = 0;
};

struct Displacement {
  std::int64_t dx = 0;
  std::int64_t dy = 0;
};

struct SimulationState {
  SimulationState(ModelParams p, Configuration c, Rng r)
      : params(p), config(std::move(c)), rng(r), displacement(config.particle_count()) {
    params.validate();
    if (config.side() != params.N) throw std::invalid_argument("configuration side does not match N");
  }

  ModelParams params;
  Configuration config;
  double time = 0.0;
  EventCounters counters;
  Rng rng;
  /// Unwrapped displacement of each particle slot since the start.
  std::vector<Displacement> displacement;
};

struct AdvanceResult {
  std::uint64_t events = 0;
  bool budget_exhausted = false;
};

/// Hooks called by advance(). `elapsed` receives every holding interval,
/// so time integrals of state functions are exact sums.
struct NullObserver {
  void elapsed(const SimulationState&, double) {}
  void exchanged(const SimulationState&, int /*from*/, int /*to*/) {}
  void flipped(const SimulationState&, int /*site*/, double /*old_angle*/) {}
};

template <class Observer>
AdvanceResult advance(SimulationState& sim, double dt, Observer& obs) {
  if (!(dt >= 0.0)) throw std::invalid_argument("advance: dt must be nonnegative");
  AdvanceResult result;
  Configuration& c = sim.config;
  const ModelParams& p = sim.params;
  const double t_end = sim.time + dt;
  const std::size_t K = c.particle_count();
  if (K == 0) {
    obs.elapsed(sim, dt);
    sim.time = t_end;
    return result;
  }
  const double n = p.N;
  const double lam_over_n = p.lambda / n;
  const double exchange_rate = 4.0 * n * n * (1.0 + lam_over_n);
  const double per_particle = exchange_rate + 1.0;
  const double total_rate = per_particle * static_cast<double>(K);
  const double exchange_fraction = exchange_rate / per_particle;
  const double accept_scale = 1.0 + lam_over_n;
  const auto& g = c.geometry();
  const bool two_type = p.angles == AngleModel::two_type;

  for (;;) {
    const double hold = exponential(sim.rng, total_rate);
    if (sim.time + hold > t_end) {
      obs.elapsed(sim, t_end - sim.time);
      sim.time = t_end;
      break;
    }
    if (sim.counters.events >= p.max_event_budget) {
      result.budget_exhausted = true;
      break;
    }
    obs.elapsed(sim, hold);
    sim.time += hold;
    ++sim.counters.events;
    ++result.events;

    const auto slot = static_cast<int>(uniform_index(sim.rng, K));
    const int site = c.particles()[slot];
    if (uniform01(sim.rng) < exchange_fraction) {
      ++sim.counters.exchange_attempts;
      const auto d = static_cast<int>(uniform_index(sim.rng, 4));
      const int axis = d >> 1;
      const int dir = (d & 1) ? -1 : 1;
      const int target = g.neighbor(site, axis, dir);
      if (c.occupied(target)) {
        ++sim.counters.blocked;
        continue;
      }
      if (p.lambda != 0.0) {
        const double bias = dir * drift_component(p.lambda, c.angle(site), axis, p.angles) / n;
        if (uniform01(sim.rng) * accept_scale >= 1.0 + bias) {
          ++sim.counters.thinned;
          continue;
        }
      }
      c.move_unchecked(site, target);
      auto& disp = sim.displacement[slot];
      (axis == 0 ? disp.dx : disp.dy) += dir;
      ++sim.counters.exchanges;
      obs.exchanged(sim, site, target);
    } else {
      ++sim.counters.flips;
      const double old = c.angle(site);
      const double fresh = two_type ? sample_two_type_angle(c, site, p.beta, sim.rng)
                                    : sample_glauber_angle(c, site, p.beta, sim.rng);
      c.set_angle_unchecked(site, fresh);
      obs.flipped(sim, site, old);
    }
  }
  return result;
}

inline AdvanceResult advance(SimulationState& sim, double dt) {
  NullObserver obs;
  return advance(sim, dt, obs);
}

/// Initial state with the "dynamics" substream of the model seed.
inline SimulationState make_simulation(const ModelParams& p, Configuration c, std::uint64_t replica = 0) {
  return SimulationState(p, std::move(c), make_stream(p.seed, "dynamics", replica));
}

}  // namespace aep
