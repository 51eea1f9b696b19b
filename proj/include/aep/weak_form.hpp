#pragma once

// Weak-form residual of a discrete trajectory:
//   <pi_T, H_T> - <pi_0, H_0> - int_0^T ( <pi_t, d_t H_t> + B_t(H) ) dt
// where
//   B_t(H) = int sum_i ( -d_i H [d - d_s'(rho) rho-hat] d_i rho + d_ii H d_s(rho) rho-hat
//                        + d_i H [2 lambda s Omega_i + 2 lambda_i(theta) d_s(rho) rho-hat] ) + H Gamma.
// Space integrals use the cell-centre midpoint rule with bins at their centres;
// d_i rho is a centred difference; the time integral is the trapezoid rule
// over every recorded slice.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "aep/pde.hpp"

namespace aep {

/// H(t, u1, u2, theta) with the derivatives the weak form needs.
struct TestFunction {
  using Fn = std::function<double(double, double, double, double)>;
  Fn value, dt, d1, d2, d11, d22;
  bool time_dependent = true;

  /// H(u, theta) = g(u1, u2) w(theta), constant in time.
  static TestFunction separable(std::function<double(double, double)> g, std::function<double(double, double)> g1,
                                std::function<double(double, double)> g2, std::function<double(double, double)> g11,
                                std::function<double(double, double)> g22, std::function<double(double)> w) {
    TestFunction h;
    h.value = [g, w](double, double a, double b, double th) { return g(a, b) * w(th); };
    h.dt = [](double, double, double, double) { return 0.0; };
    h.d1 = [g1, w](double, double a, double b, double th) { return g1(a, b) * w(th); };
    h.d2 = [g2, w](double, double a, double b, double th) { return g2(a, b) * w(th); };
    h.d11 = [g11, w](double, double a, double b, double th) { return g11(a, b) * w(th); };
    h.d22 = [g22, w](double, double a, double b, double th) { return g22(a, b) * w(th); };
    h.time_dependent = false;
    return h;
  }

  /// cos(2 pi k u1) for any angle.
  static TestFunction cosine_u1(int k = 1) {
    const double w = kTwoPi * k;
    return separable([w](double a, double) { return std::cos(w * a); },
                     [w](double a, double) { return -w * std::sin(w * a); }, [](double, double) { return 0.0; },
                     [w](double a, double) { return -w * w * std::cos(w * a); }, [](double, double) { return 0.0; },
                     [](double) { return 1.0; });
  }
};

/// Sum of two test functions (used to check linearity).
inline TestFunction operator+(const TestFunction& a, const TestFunction& b) {
  auto add = [](TestFunction::Fn f, TestFunction::Fn g) {
    return [f, g](double t, double x, double y, double th) { return f(t, x, y, th) + g(t, x, y, th); };
  };
  TestFunction s;
  s.value = add(a.value, b.value);
  s.dt = add(a.dt, b.dt);
  s.d1 = add(a.d1, b.d1);
  s.d2 = add(a.d2, b.d2);
  s.d11 = add(a.d11, b.d11);
  s.d22 = add(a.d22, b.d22);
  s.time_dependent = a.time_dependent || b.time_dependent;
  return s;
}

class WeakResidual {
 public:
  WeakResidual(TestFunction H, const PdeSolver& solver) : H_(std::move(H)), solver_(solver) {}

  /// Feeds the next slice of the trajectory (times must increase).
  void add(const AngularDensityField& f) {
    const auto& cfg = solver_.config();
    if (f.L != cfg.L || f.M != cfg.M) throw std::invalid_argument("weak residual: mismatched grids");
    const double pair = pairing(f);
    const double rate = integrand(f);
    if (!started_) {
      start_pairing_ = pair;
      started_ = true;
    } else {
      const double dt = f.time - last_time_;
      if (!(dt > 0.0)) throw std::invalid_argument("weak residual: slice times must increase");
      integral_ += 0.5 * dt * (last_rate_ + rate);
    }
    last_pairing_ = pair;
    last_rate_ = rate;
    last_time_ = f.time;
  }

  /// Left side minus right side of the weak identity.
  double value() const {
    if (!started_) throw std::logic_error("weak residual: no slices");
    return last_pairing_ - start_pairing_ - integral_;
  }

  double lhs() const { return last_pairing_ - start_pairing_; }
  double rhs() const { return integral_; }

 private:
  struct Cache {
    std::vector<double> v, d1, d2, d11, d22, dt;
  };

  const Cache& cache(const AngularDensityField& f) {
    if (H_.time_dependent || cache_.v.empty() || cache_L_ != f.L || cache_M_ != f.M) {
      const std::size_t n = f.data.size();
      cache_.v.resize(n);
      cache_.d1.resize(n);
      cache_.d2.resize(n);
      cache_.d11.resize(n);
      cache_.d22.resize(n);
      cache_.dt.resize(n);
      const AngleBins bins(f.M);
      for (int j = 0; j < f.L; ++j)
        for (int i = 0; i < f.L; ++i) {
          const double u1 = (i + 0.5) / f.L, u2 = (j + 0.5) / f.L;
          const std::size_t c = static_cast<std::size_t>(i) + static_cast<std::size_t>(f.L) * j;
          for (int k = 0; k < f.M; ++k) {
            const double th = bins.center(k);
            const std::size_t a = c * f.M + k;
            cache_.v[a] = H_.value(f.time, u1, u2, th);
            cache_.d1[a] = H_.d1(f.time, u1, u2, th);
            cache_.d2[a] = H_.d2(f.time, u1, u2, th);
            cache_.d11[a] = H_.d11(f.time, u1, u2, th);
            cache_.d22[a] = H_.d22(f.time, u1, u2, th);
            cache_.dt[a] = H_.dt(f.time, u1, u2, th);
          }
        }
      cache_L_ = f.L;
      cache_M_ = f.M;
    }
    return cache_;
  }

  double pairing(const AngularDensityField& f) {
    const Cache& h = cache(f);
    double s = 0.0;
    for (std::size_t a = 0; a < f.data.size(); ++a) s += f.data[a] * h.v[a];
    return s / (static_cast<double>(f.L) * f.L);
  }

  double integrand(const AngularDensityField& f) {
    const Cache& h = cache(f);
    const auto& table = solver_.table();
    const double lambda = solver_.config().lambda;
    const int L = f.L, M = f.M;
    const double inv_2h = 0.5 * L;
    std::vector<double> rho(f.cells());
    for (std::size_t c = 0; c < f.cells(); ++c) rho[c] = f.rho(c);
    auto id = [L](int i, int j) {
      return static_cast<std::size_t>((i % L + L) % L) + static_cast<std::size_t>(L) * ((j % L + L) % L);
    };
    double s = 0.0;
    for (int j = 0; j < L; ++j)
      for (int i = 0; i < L; ++i) {
        const std::size_t c = id(i, j);
        const std::span<const double> rh(f.cell_ptr(c), M);
        const double r = rho[c];
        const double d = table.ds(r), dp = table.ds_prime(r);
        const double g1 = (rho[id(i + 1, j)] - rho[id(i - 1, j)]) * inv_2h;
        const double g2 = (rho[id(i, j + 1)] - rho[id(i, j - 1)]) * inv_2h;
        const auto om = omega_vector(rh);
        const auto gamma = solver_.gamma(rh);
        for (int k = 0; k < M; ++k) {
          const std::size_t a = c * M + k;
          const double frac = r > 0.0 ? rh[k] / r : 0.0;
          const double dk = frac * (1.0 - d), sk = frac * (1.0 - r - d);
          const auto e = bin_direction(M, k);
          const double grad_coef = dk - dp * rh[k];
          s += rh[k] * h.dt[a];
          s += -h.d1[a] * grad_coef * g1 - h.d2[a] * grad_coef * g2;
          s += (h.d11[a] + h.d22[a]) * d * rh[k];
          s += h.d1[a] * 2.0 * lambda * (sk * om[0] + e[0] * d * rh[k]);
          s += h.d2[a] * 2.0 * lambda * (sk * om[1] + e[1] * d * rh[k]);
          s += h.v[a] * gamma[k];
        }
      }
    return s / (static_cast<double>(L) * L);
  }

  TestFunction H_;
  const PdeSolver& solver_;
  Cache cache_;
  int cache_L_ = 0, cache_M_ = 0;
  bool started_ = false;
  double start_pairing_ = 0.0, last_pairing_ = 0.0, last_rate_ = 0.0, last_time_ = 0.0, integral_ = 0.0;
};

/// Residual of a trajectory stored as slices.
inline double weak_form_residual(std::span<const AngularDensityField> slices, const TestFunction& H, const PdeSolver& solver) {
  WeakResidual w(H, solver);
  for (const auto& f : slices) w.add(f);
  return w.value();
}

}  // namespace aep
