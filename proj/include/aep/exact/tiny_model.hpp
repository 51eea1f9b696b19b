#pragma once

// Two-type model on a tiny n1 x n2 torus with every state enumerated.
// Site value 0 = empty, 1 = angle 0, 2 = angle pi. A state is the base-3
// number sum_x value_x 3^x with sites numbered x1 + n1 x2.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aep/configuration.hpp"
#include "aep/glauber.hpp"

namespace aep::exact {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr std::size_t kMaxStates = 600000;

class TinyModel {
 public:
  TinyModel(int n1, int n2, double lambda = 0.0, double beta = 0.0, double n_scale = 1.0)
      : n1_(n1), n2_(n2), lambda_(lambda), beta_(beta), n_scale_(n_scale) {
    if (n1 < 1 || n2 < 1 || n1 * n2 > 12) throw std::invalid_argument("tiny model needs 1 <= n1 n2 <= 12");
    states_ = 1;
    for (int i = 0; i < sites(); ++i) states_ *= 3;
    if (states_ > kMaxStates) throw std::invalid_argument("tiny model: " + std::to_string(states_) + " states exceed the budget");
    pow3_.resize(sites());
    std::size_t p = 1;
    for (int i = 0; i < sites(); ++i, p *= 3) pow3_[i] = p;
  }

  int n1() const noexcept { return n1_; }
  int n2() const noexcept { return n2_; }
  int sites() const noexcept { return n1_ * n2_; }
  std::size_t states() const noexcept { return states_; }
  double lambda() const noexcept { return lambda_; }
  double beta() const noexcept { return beta_; }
  double n_scale() const noexcept { return n_scale_; }

  int value(std::size_t state, int site) const noexcept { return static_cast<int>((state / pow3_[site]) % 3); }
  std::size_t with_value(std::size_t state, int site, int v) const noexcept {
    return state + (static_cast<std::size_t>(v) - value(state, site)) * pow3_[site];
  }

  /// Neighbour on the torus; on a side of length 1 or 2 this may be the site itself or repeat.
  int neighbor(int site, int axis, int dir) const noexcept {
    int x = site % n1_, y = site / n1_;
    if (axis == 0) x = ((x + dir) % n1_ + n1_) % n1_;
    else y = ((y + dir) % n2_ + n2_) % n2_;
    return x + n1_ * y;
  }

  static double angle_of(int v) noexcept { return v == 2 ? kPi : 0.0; }
  static int eta(int v) noexcept { return v != 0; }

  /// lambda_i(theta) for the two atoms: lambda_1 = +-lambda, lambda_2 = 0.
  double drift(int v, int axis) const noexcept {
    if (v == 0 || axis == 1) return 0.0;
    return v == 1 ? lambda_ : -lambda_;
  }

  /// S = sum_{|z|=1} eta_{x+z} cos(theta_{x+z}).
  int field(std::size_t state, int site) const noexcept {
    int s = 0;
    for (int axis = 0; axis < 2; ++axis)
      for (int dir : {1, -1}) {
        const int v = value(state, neighbor(site, axis, dir));
        s += v == 1 ? 1 : (v == 2 ? -1 : 0);
      }
    return s;
  }

  Configuration to_configuration(std::size_t state) const {
    if (n1_ != n2_) throw std::invalid_argument("only square tiny models map to a Configuration");
    Configuration c{TorusGeometry(n1_)};
    for (int s = 0; s < sites(); ++s)
      if (value(state, s)) c.place(s, angle_of(value(state, s)));
    return c;
  }

  std::size_t from_configuration(const Configuration& c) const {
    std::size_t st = 0;
    for (int s = 0; s < sites(); ++s)
      if (c.occupied(s)) st += pow3_[s] * (c.angle(s) == 0.0 ? 1 : 2);
    return st;
  }

 private:
  int n1_, n2_;
  double lambda_, beta_, n_scale_;
  std::size_t states_ = 0;
  std::vector<std::size_t> pow3_;
};

/// Product measure with P(angle 0) = a, P(angle pi) = b at every site.
inline Vector product_weights(const TinyModel& m, double a, double b) {
  if (!(a >= 0.0 && b >= 0.0 && a + b <= 1.0)) throw std::invalid_argument("product weights need a, b >= 0 and a + b <= 1");
  Vector w(m.states());
  const double p[3] = {1.0 - a - b, a, b};
  for (std::size_t s = 0; s < m.states(); ++s) {
    double v = 1.0;
    for (int x = 0; x < m.sites(); ++x) v *= p[m.value(s, x)];
    w[s] = v;
  }
  return w;
}

/// mu*_alpha restricted to the two atoms: alpha/2 on each.
inline Vector uniform_angle_weights(const TinyModel& m, double alpha) { return product_weights(m, alpha / 2, alpha / 2); }

/// State function phi(state) as a vector.
inline Vector state_function(const TinyModel& m, const std::function<double(std::size_t)>& phi) {
  Vector v(m.states());
  for (std::size_t s = 0; s < m.states(); ++s) v[s] = phi(s);
  return v;
}

}  // namespace aep::exact
