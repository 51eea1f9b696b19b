#pragma once

// Dense generator matrices of the tiny two-type model. Row s holds the rates
// out of state s; the diagonal makes every row sum to zero.

#include "aep/exact/tiny_model.hpp"

namespace aep::exact {

struct Generators {
  Matrix symmetric;      // L: rate 1 per licit jump
  Matrix weak_asym;      // L^WA: rate delta lambda_i(theta) per licit jump (not Markov)
  Matrix glauber;        // L^G: resample the angle from the two-atom law
  Matrix full;           // N^2 L + N L^WA + L^G
};

inline void set_diagonal_from_rows(Matrix& A) {
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    A(r, r) = 0.0;
    A(r, r) = -A.row(r).sum();
  }
}

inline Generators build_generators(const TinyModel& m) {
  const auto n = static_cast<Eigen::Index>(m.states());
  Generators g{Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix::Zero(n, n), Matrix()};
  for (std::size_t s = 0; s < m.states(); ++s) {
    const auto r = static_cast<Eigen::Index>(s);
    for (int x = 0; x < m.sites(); ++x) {
      const int v = m.value(s, x);
      if (v == 0) continue;
      for (int axis = 0; axis < 2; ++axis)
        for (int dir : {1, -1}) {
          const int y = m.neighbor(x, axis, dir);
          if (m.value(s, y) != 0) continue;  // also covers y == x
          const auto t = static_cast<Eigen::Index>(m.with_value(m.with_value(s, x, 0), y, v));
          g.symmetric(r, t) += 1.0;
          g.weak_asym(r, t) += dir * m.drift(v, axis);
        }
      const double up = two_type_up_probability(m.field(s, x), m.beta());
      const int other = v == 1 ? 2 : 1;
      const auto t = static_cast<Eigen::Index>(m.with_value(s, x, other));
      g.glauber(r, t) += other == 1 ? up : 1.0 - up;
    }
  }
  set_diagonal_from_rows(g.symmetric);
  set_diagonal_from_rows(g.weak_asym);
  set_diagonal_from_rows(g.glauber);
  const double N = m.n_scale();
  g.full = N * N * g.symmetric + N * g.weak_asym + g.glauber;
  return g;
}

inline double max_row_sum(const Matrix& A) { return A.rowwise().sum().cwiseAbs().maxCoeff(); }

/// || D A - A^T D ||_inf with D = diag(w).
inline double self_adjointness_defect(const Matrix& A, const Vector& w) {
  const Matrix DA = w.asDiagonal() * A;
  return (DA - DA.transpose()).cwiseAbs().maxCoeff();
}

/// Adjoint in L^2(w): D^{-1} A^T D.
inline Matrix l2_adjoint(const Matrix& A, const Vector& w) {
  return w.cwiseInverse().asDiagonal() * A.transpose() * w.asDiagonal();
}

}  // namespace aep::exact
