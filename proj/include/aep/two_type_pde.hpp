#pragma once

// Dedicated solver for the two-type system (angles 0 and pi):
//   d_t rho+ = div[ d+ grad rho + d_s grad rho+ ] - 2 lambda d_1[ m s+ + d_s rho+ ] + Gamma+
//   d_t rho- = div[ d- grad rho + d_s grad rho- ] - 2 lambda d_1[ m s- - d_s rho- ] + Gamma-
// with m = rho+ - rho-. Same stencil as PdeSolver with M = 2.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "aep/pde.hpp"

namespace aep {

struct TwoTypeField {
  int L = 0;
  double time = 0.0;
  std::vector<double> plus, minus;  // index i + L j

  TwoTypeField() = default;
  explicit TwoTypeField(int side) : L(side), plus(static_cast<std::size_t>(side) * side), minus(plus.size()) {}

  static TwoTypeField from(const AngularDensityField& f) {
    if (f.M != 2) throw std::invalid_argument("two-type field needs M = 2");
    TwoTypeField t(f.L);
    t.time = f.time;
    for (std::size_t c = 0; c < f.cells(); ++c) {
      t.plus[c] = f.at(c, 0);
      t.minus[c] = f.at(c, 1);
    }
    return t;
  }

  AngularDensityField to_field() const {
    AngularDensityField f(L, 2);
    f.time = time;
    for (std::size_t c = 0; c < plus.size(); ++c) {
      f.at(c, 0) = plus[c];
      f.at(c, 1) = minus[c];
    }
    return f;
  }
};

class TwoTypeSolver {
 public:
  TwoTypeSolver(double lambda, double beta, double dt, DsTable table)
      : lambda_(lambda), beta_(beta), dt_(dt), table_(std::move(table)) {
    if (table_.empty()) throw std::invalid_argument("two-type solver: d_s table is empty");
  }

  /// Explicit Euler step without limiting.
  void step(TwoTypeField& f) const {
    const int L = f.L;
    const std::size_t C = f.plus.size();
    const double inv_h = L;
    std::vector<double> rho(C), ds(C), dp(C), dm(C), gp(C), gm(C), ap(C), am(C);
    for (std::size_t c = 0; c < C; ++c) {
      const double p = f.plus[c], q = f.minus[c], r = p + q;
      const double d = table_.ds(r);
      const double fp = r > 0.0 ? p / r : 0.0, fm = r > 0.0 ? q / r : 0.0;
      const double m = p - q;
      rho[c] = r;
      ds[c] = d;
      dp[c] = fp * (1.0 - d);
      dm[c] = fm * (1.0 - d);
      gp[c] = 2.0 * lambda_ * (fp * (1.0 - r - d) * m + d * p);
      gm[c] = 2.0 * lambda_ * (fm * (1.0 - r - d) * m - d * q);
      const auto g = creation_rate_two_type(p, q, beta_);
      ap[c] = g.values[0];
      am[c] = g.values[1];
    }
    auto id = [L](int i, int j) {
      return static_cast<std::size_t>((i % L + L) % L) + static_cast<std::size_t>(L) * ((j % L + L) % L);
    };
    // Outward flux through the +x / +y face of each cell.
    std::vector<double> jxp(C), jxm(C), jyp(C), jym(C);
    for (int j = 0; j < L; ++j)
      for (int i = 0; i < L; ++i) {
        const std::size_t c = id(i, j);
        for (int axis = 0; axis < 2; ++axis) {
          const std::size_t n = axis == 0 ? id(i + 1, j) : id(i, j + 1);
          const double grad = (rho[n] - rho[c]) * inv_h;
          const double dsf = 0.5 * (ds[c] + ds[n]);
          const double fp = 0.5 * (dp[c] + dp[n]) * grad + dsf * (f.plus[n] - f.plus[c]) * inv_h;
          const double fm = 0.5 * (dm[c] + dm[n]) * grad + dsf * (f.minus[n] - f.minus[c]) * inv_h;
          if (axis == 0) {
            jxp[c] = 0.5 * (gp[c] + gp[n]) - fp;
            jxm[c] = 0.5 * (gm[c] + gm[n]) - fm;
          } else {
            jyp[c] = -fp;
            jym[c] = -fm;
          }
        }
      }
    for (int j = 0; j < L; ++j)
      for (int i = 0; i < L; ++i) {
        const std::size_t c = id(i, j), wx = id(i - 1, j), wy = id(i, j - 1);
        f.plus[c] += dt_ * (-(jxp[c] - jxp[wx] + jyp[c] - jyp[wy]) * inv_h + ap[c]);
        f.minus[c] += dt_ * (-(jxm[c] - jxm[wx] + jym[c] - jym[wy]) * inv_h + am[c]);
      }
    f.time += dt_;
  }

 private:
  double lambda_, beta_, dt_;
  DsTable table_;
};

}  // namespace aep
