#pragma once

// Exact action of the generator on cylinder functions, and the instantaneous
// currents it decomposes into. Test-side machinery: costs grow with the
// support of f, not with the event rate.

#include <functional>
#include <vector>

#include "aep/configuration.hpp"
#include "aep/dynamics.hpp"
#include "aep/glauber.hpp"

namespace aep {

using AngleFunction = std::function<double(double)>;

/// A function of the configuration that depends only on the sites in `support`.
/// An empty support means "all sites".
struct CylinderFunction {
  std::function<double(const Configuration&)> eval;
  std::vector<int> support;
};

namespace detail {

inline std::vector<char> support_mask(const Configuration& c, const CylinderFunction& f) {
  std::vector<char> mask(c.site_count(), f.support.empty() ? 1 : 0);
  for (int s : f.support) mask[s] = 1;
  return mask;
}

/// Calls fn(x, axis, dir, target) for every licit jump x -> target that can change f.
template <class Fn>
void for_each_relevant_jump(const Configuration& c, const std::vector<char>& mask, Fn&& fn) {
  const auto& g = c.geometry();
  for (int x : std::vector<int>(c.particles().begin(), c.particles().end())) {
    for (int axis = 0; axis < 2; ++axis)
      for (int dir = -1; dir <= 1; dir += 2) {
        const int y = g.neighbor(x, axis, dir);
        if (y == x || c.occupied(y)) continue;
        if (!mask[x] && !mask[y]) continue;
        fn(x, axis, dir, y);
      }
  }
}

}  // namespace detail

/// L f = sum_x sum_{|z|=1} eta_x (1 - eta_{x+z}) (f(eta^{x,x+z}) - f(eta)).
inline double generator_symmetric(const CylinderFunction& f, Configuration c) {
  const auto mask = detail::support_mask(c, f);
  const double f0 = f.eval(c);
  double acc = 0.0;
  detail::for_each_relevant_jump(c, mask, [&](int x, int, int, int y) {
    c.exchange(x, y);
    acc += f.eval(c) - f0;
    c.exchange(x, y);
  });
  return acc;
}

/// L^WA f = sum_x sum_{z = delta e_i} delta lambda_i(theta_x) eta_x (1 - eta_{x+z}) (f(eta^{x,x+z}) - f(eta)).
inline double generator_weak_asymmetric(const CylinderFunction& f, Configuration c, double lambda,
                                        AngleModel model = AngleModel::continuum) {
  const auto mask = detail::support_mask(c, f);
  const double f0 = f.eval(c);
  double acc = 0.0;
  detail::for_each_relevant_jump(c, mask, [&](int x, int axis, int dir, int y) {
    const double rate = dir * drift_component(lambda, c.angle(x), axis, model);
    c.exchange(x, y);
    acc += rate * (f.eval(c) - f0);
    c.exchange(x, y);
  });
  return acc;
}

/// L^G f. Continuum angles use the Q-node periodic trapezoid rule for the
/// theta integral; two-type angles use the exact two-atom sum.
inline double generator_glauber(const CylinderFunction& f, Configuration c, double beta, int quadrature_order = 4096,
                                AngleModel model = AngleModel::continuum) {
  const auto mask = detail::support_mask(c, f);
  const double f0 = f.eval(c);
  double acc = 0.0;
  for (int x : std::vector<int>(c.particles().begin(), c.particles().end())) {
    if (!mask[x]) continue;
    const double old = c.angle(x);
    if (model == AngleModel::two_type) {
      const double up = two_type_up_probability(two_type_field(c, x), beta);
      c.set_angle_unchecked(x, 0.0);
      acc += up * (f.eval(c) - f0);
      c.set_angle_unchecked(x, kPi);
      acc += (1.0 - up) * (f.eval(c) - f0);
    } else {
      const double h = kTwoPi / quadrature_order;
      const Resultant r = neighbor_resultant(c, x);
      const double kappa = beta * r.norm(), phi = r.direction();
      double part = 0.0;
      for (int q = 0; q < quadrature_order; ++q) {
        const double theta = h * q;
        const double w = von_mises_density(theta, phi, kappa);
        c.set_angle_unchecked(x, theta);
        part += w * (f.eval(c) - f0);
      }
      acc += part * h;
    }
    c.set_angle_unchecked(x, old);
  }
  return acc;
}

/// (N^2 L + N L^WA + L^G) f, i.e. L_N f.
inline double apply_generator(const CylinderFunction& f, const Configuration& c, const ModelParams& p,
                              int quadrature_order = 4096) {
  const double n = p.N;
  return n * n * generator_symmetric(f, c) + n * generator_weak_asymmetric(f, c, p.lambda, p.angles) +
         generator_glauber(f, c, p.beta, quadrature_order, p.angles);
}

/// eta^omega_x as a cylinder function.
inline CylinderFunction weighted_occupation(int site, AngleFunction omega) {
  return {[site, omega = std::move(omega)](const Configuration& c) { return c.occupied(site) ? omega(c.angle(site)) : 0.0; },
          {site}};
}

/// j^omega along the edge (x, x + e_i): eta^omega_x (1 - eta_{x+e_i}) - eta^omega_{x+e_i} (1 - eta_x).
inline double current_sym(const Configuration& c, int x, int axis, const AngleFunction& omega) {
  const int y = c.geometry().neighbor(x, axis, +1);
  const double wx = c.occupied(x) ? omega(c.angle(x)) : 0.0;
  const double wy = c.occupied(y) ? omega(c.angle(y)) : 0.0;
  return wx * (1 - c.eta(y)) - wy * (1 - c.eta(x));
}

/// Weakly asymmetric current eta^{omega lambda_i}_x (1 - eta_{x+e_i}) + eta^{omega lambda_i}_{x+e_i} (1 - eta_x).
inline double current_asym(const Configuration& c, int x, int axis, const AngleFunction& omega, double lambda,
                           AngleModel model = AngleModel::continuum) {
  const int y = c.geometry().neighbor(x, axis, +1);
  auto weight = [&](int s) { return c.occupied(s) ? omega(c.angle(s)) * drift_component(lambda, c.angle(s), axis, model) : 0.0; };
  return weight(x) * (1 - c.eta(y)) + weight(y) * (1 - c.eta(x));
}

/// gamma^omega at x: eta_x int c_{x,beta}(theta) (omega(theta) - omega(theta_x)) d theta.
inline double alignment_rate(const Configuration& c, int x, const AngleFunction& omega, double beta,
                             int quadrature_order = 4096, AngleModel model = AngleModel::continuum) {
  if (!c.occupied(x)) return 0.0;
  const double current = omega(c.angle(x));
  if (model == AngleModel::two_type) {
    const double up = two_type_up_probability(two_type_field(c, x), beta);
    return up * (omega(0.0) - current) + (1.0 - up) * (omega(kPi) - current);
  }
  const double h = kTwoPi / quadrature_order;
  const Resultant r = neighbor_resultant(c, x);
  const double kappa = beta * r.norm(), phi = r.direction();
  double acc = 0.0;
  for (int q = 0; q < quadrature_order; ++q) acc += von_mises_density(h * q, phi, kappa) * (omega(h * q) - current);
  return acc * h;
}

}  // namespace aep
