#pragma once

// Identity checks on the tiny model. Each returns a max-abs defect.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "aep/exact/generators.hpp"

namespace aep::exact {

struct Verdict {
  std::string name;
  double defect = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;

  nlohmann::json to_json() const {
    return {{"name", name}, {"defect", defect}, {"tolerance", tolerance}, {"pass", pass}, {"detail", detail}};
  }
};

/// Upper bound check: passes iff defect <= tolerance.
inline Verdict bound_verdict(std::string name, double defect, double tolerance, std::string detail = {}) {
  return {std::move(name), defect, tolerance, defect <= tolerance, std::move(detail)};
}

/// tau_x j^omega_i as a state function: eta^w_x (1 - eta_{x+e_i}) - eta^w_{x+e_i} (1 - eta_x).
inline Vector current_vector(const TinyModel& m, int x, int axis, const double omega[3]) {
  const int y = m.neighbor(x, axis, 1);
  return state_function(m, [&](std::size_t s) {
    const int vx = m.value(s, x), vy = m.value(s, y);
    return omega[vx] * (1 - TinyModel::eta(vy)) - omega[vy] * (1 - TinyModel::eta(vx));
  });
}

/// || L eta^w_x - sum_i (tau_{x-e_i} j^w_i - tau_x j^w_i) ||_inf over all x.
/// omega[v] is the weight of site value v (omega[0] = 0).
inline double current_decomposition_defect(const TinyModel& m, const Matrix& L, const double omega[3]) {
  double worst = 0.0;
  for (int x = 0; x < m.sites(); ++x) {
    const Vector f = state_function(m, [&](std::size_t s) { return omega[m.value(s, x)]; });
    Vector rhs = Vector::Zero(static_cast<Eigen::Index>(m.states()));
    for (int axis = 0; axis < 2; ++axis)
      rhs += current_vector(m, m.neighbor(x, axis, -1), axis, omega) - current_vector(m, x, axis, omega);
    worst = std::max(worst, (L * f - rhs).cwiseAbs().maxCoeff());
  }
  return worst;
}

/// Multiplication operator sum_x sum_i tau_x j^{lambda_i}_i.
inline Vector asymmetric_current_sum(const TinyModel& m) {
  Vector total = Vector::Zero(static_cast<Eigen::Index>(m.states()));
  for (int axis = 0; axis < 2; ++axis) {
    const double omega[3] = {0.0, m.drift(1, axis), m.drift(2, axis)};
    for (int x = 0; x < m.sites(); ++x) total += current_vector(m, x, axis, omega);
  }
  return total;
}

struct AdjointDefects {
  double derived = 0.0;      // || L^WA* + L^WA + 2 M_j ||
  double plus_sign = 0.0;   // || L^WA* + L^WA - 2 M_j ||
};

/// Adjoint of L^WA in L^2(mu*_alpha). Reversing a jump reverses the sign of
/// its drift weight, and the diagonal is unchanged, so
///   L^WA* = -L^WA - 2 sum_x sum_i tau_x j^{lambda_i}_i.
inline AdjointDefects adjoint_check(const TinyModel& m, double alpha) {
  const Generators g = build_generators(m);
  const Vector w = uniform_angle_weights(m, alpha);
  const Matrix adj = l2_adjoint(g.weak_asym, w);
  const Matrix Mj = asymmetric_current_sum(m).asDiagonal();
  return {(adj + g.weak_asym + 2.0 * Mj).cwiseAbs().maxCoeff(), (adj + g.weak_asym - 2.0 * Mj).cwiseAbs().maxCoeff()};
}

/// || mu^T L_N ||_inf for mu = mu*_alpha.
inline double stationarity_residual(const TinyModel& m, double alpha) {
  const Generators g = build_generators(m);
  const Vector w = uniform_angle_weights(m, alpha);
  return (w.transpose() * g.full).cwiseAbs().maxCoeff();
}

/// -E_mu(h L h).
inline double dirichlet_form_generator(const Matrix& L, const Vector& w, const Vector& h) {
  return -(w.array() * h.array() * (L * h).array()).sum();
}

/// (1/2) E_mu( sum_x sum_{|z|=1} eta_x (1 - eta_{x+z}) (h(eta^{x,x+z}) - h(eta))^2 ).
inline double dirichlet_form_gradient(const TinyModel& m, const Vector& w, const Vector& h) {
  double total = 0.0;
  for (std::size_t s = 0; s < m.states(); ++s) {
    double acc = 0.0;
    for (int x = 0; x < m.sites(); ++x) {
      const int v = m.value(s, x);
      if (!v) continue;
      for (int axis = 0; axis < 2; ++axis)
        for (int dir : {1, -1}) {
          const int y = m.neighbor(x, axis, dir);
          if (m.value(s, y)) continue;
          const double d = h[static_cast<Eigen::Index>(m.with_value(m.with_value(s, x, 0), y, v))] - h[static_cast<Eigen::Index>(s)];
          acc += d * d;
        }
    }
    total += w[static_cast<Eigen::Index>(s)] * acc;
  }
  return 0.5 * total;
}

/// Connected components of the exchange-jump graph.
inline std::vector<int> jump_sectors(const TinyModel& m, int* count = nullptr) {
  std::vector<int> parent(m.states());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t s = 0; s < m.states(); ++s)
    for (int x = 0; x < m.sites(); ++x) {
      const int v = m.value(s, x);
      if (!v) continue;
      for (int axis = 0; axis < 2; ++axis)
        for (int dir : {1, -1}) {
          const int y = m.neighbor(x, axis, dir);
          if (m.value(s, y)) continue;
          const int a = find(static_cast<int>(s)), b = find(static_cast<int>(m.with_value(m.with_value(s, x, 0), y, v)));
          if (a != b) parent[a] = b;
        }
    }
  std::vector<int> label(m.states(), -1), root_label(m.states(), -1);
  int n = 0;
  for (std::size_t s = 0; s < m.states(); ++s) {
    const int r = find(static_cast<int>(s));
    if (root_label[r] < 0) root_label[r] = n++;
    label[s] = root_label[r];
  }
  if (count) *count = n;
  return label;
}

struct KernelReport {
  int sectors = 0;
  int kernel_dimension = 0;
  double max_sector_variation = 0.0;  // of kernel vectors, over all sectors
};

/// Kernel of the Dirichlet form: eigenvectors of the symmetrized generator
/// with eigenvalue ~0 must be constant on every jump sector.
inline KernelReport dirichlet_kernel(const TinyModel& m, const Vector& w, double tol = 1e-9) {
  const Generators g = build_generators(m);
  const Vector sq = w.cwiseSqrt();
  const Matrix S = -(sq.asDiagonal() * g.symmetric * sq.cwiseInverse().asDiagonal());
  const Matrix Ssym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(Ssym);
  KernelReport rep;
  const auto labels = jump_sectors(m, &rep.sectors);
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    if (std::abs(es.eigenvalues()[k]) > tol) continue;
    ++rep.kernel_dimension;
    const Vector h = es.eigenvectors().col(k).cwiseQuotient(sq);
    std::vector<double> lo(rep.sectors, 1e300), hi(rep.sectors, -1e300);
    for (std::size_t s = 0; s < m.states(); ++s) {
      lo[labels[s]] = std::min(lo[labels[s]], h[static_cast<Eigen::Index>(s)]);
      hi[labels[s]] = std::max(hi[labels[s]], h[static_cast<Eigen::Index>(s)]);
    }
    for (int c = 0; c < rep.sectors; ++c) rep.max_sector_variation = std::max(rep.max_sector_variation, hi[c] - lo[c]);
  }
  return rep;
}

/// One occupied site on a 1 x 1 torus: the flip chain between the two angles
/// has the stationary law solving pi(+) (1 - p+(S+)) = pi(-) p+(S-), where
/// the site sees itself through all four bonds (S = +-4).
inline double single_site_glauber_defect(double beta) {
  const TinyModel m(1, 1, 0.0, beta);
  const Generators g = build_generators(m);
  // states: 0 empty, 1 plus, 2 minus
  const double out_plus = g.glauber(1, 2), out_minus = g.glauber(2, 1);
  const double pi_plus = out_minus / (out_plus + out_minus);
  const double up_plus = two_type_up_probability(4, beta), up_minus = two_type_up_probability(-4, beta);
  const double expected = up_minus / ((1.0 - up_plus) + up_minus);
  Eigen::Matrix2d Q;
  Q << -out_plus, out_plus, out_minus, -out_minus;
  const Eigen::RowVector2d pi(pi_plus, 1.0 - pi_plus);
  return std::max(std::abs(pi_plus - expected), (pi * Q).cwiseAbs().maxCoeff());
}

}  // namespace aep::exact
