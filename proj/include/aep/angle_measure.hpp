#pragma once

// Nonnegative measures on the circle with total mass at most one: the
// grand-canonical parameters. A measure is either a finite list of atoms or a
// histogram whose bins carry uniform density.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "aep/angles.hpp"
#include "aep/rng.hpp"

namespace aep {

struct AngleAtom {
  double angle = 0.0;
  double weight = 0.0;
};

class AngleMeasure {
 public:
  AngleMeasure() : bins_(1) {}

  static AngleMeasure zero() { return AngleMeasure(); }

  static AngleMeasure from_atoms(std::vector<AngleAtom> atoms) {
    AngleMeasure m;
    for (auto& a : atoms) {
      check_weight(a.weight);
      a.angle = wrap_angle(a.angle);
    }
    m.atoms_ = std::move(atoms);
    m.check_mass();
    return m;
  }

  static AngleMeasure dirac(double angle, double weight = 1.0) { return from_atoms({{angle, weight}}); }

  static AngleMeasure from_histogram(AngleBins bins, std::vector<double> weights) {
    if (static_cast<int>(weights.size()) != bins.count())
      throw std::invalid_argument("histogram has " + std::to_string(weights.size()) + " weights for " +
                                  std::to_string(bins.count()) + " bins");
    for (double w : weights) check_weight(w);
    AngleMeasure m;
    m.bins_ = bins;
    m.hist_ = std::move(weights);
    m.check_mass();
    return m;
  }

  /// alpha times the uniform law on [0, 2pi).
  static AngleMeasure uniform(double alpha) { return from_histogram(AngleBins(1), {alpha}); }

  bool is_histogram() const noexcept { return !hist_.empty(); }
  const std::vector<AngleAtom>& atoms() const noexcept { return atoms_; }
  const AngleBins& histogram_bins() const noexcept { return bins_; }
  const std::vector<double>& histogram_weights() const noexcept { return hist_; }

  double mass() const noexcept {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight;
    for (double w : hist_) s += w;
    return s;
  }

  /// Integral of f against the measure. Histogram bins use a composite
  /// midpoint rule with `nodes_per_bin` nodes.
  template <class F>
  double integrate(F&& f, int nodes_per_bin = 64) const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight * f(a.angle);
    if (!hist_.empty()) {
      const double w = bins_.width();
      for (int k = 0; k < bins_.count(); ++k) {
        if (hist_[k] == 0.0) continue;
        double acc = 0.0;
        for (int q = 0; q < nodes_per_bin; ++q)
          acc += f(wrap_angle(bins_.lower_edge(k) + w * (q + 0.5) / nodes_per_bin));
        s += hist_[k] * acc / nodes_per_bin;
      }
    }
    return s;
  }

  /// Draws an angle from the normalized measure (alpha-hat / alpha).
  double sample_angle(Rng& rng) const {
    const double total = mass();
    if (!(total > 0.0)) throw std::logic_error("cannot sample an angle from a zero measure");
    double u = uniform01(rng) * total;
    for (const auto& a : atoms_) {
      if (u < a.weight) return a.angle;
      u -= a.weight;
    }
    for (int k = 0; k < static_cast<int>(hist_.size()); ++k) {
      if (u < hist_[k] || k + 1 == static_cast<int>(hist_.size()))
        return wrap_angle(bins_.lower_edge(k) + bins_.width() * uniform01(rng));
      u -= hist_[k];
    }
    return atoms_.back().angle;  // rounding: u landed past the last atom
  }

  /// Mass carried by each bin of `target`.
  std::vector<double> binned(const AngleBins& target) const {
    std::vector<double> out(target.count(), 0.0);
    for (const auto& a : atoms_) out[target.index_of(a.angle)] += a.weight;
    if (hist_.empty()) return out;
    if (target == bins_) {
      for (int k = 0; k < target.count(); ++k) out[k] += hist_[k];
      return out;
    }
    for (int k = 0; k < bins_.count(); ++k) {
      if (hist_[k] == 0.0) continue;
      const double a = bins_.lower_edge(k), b = a + bins_.width();
      for (int j = 0; j < target.count(); ++j) {
        double overlap = 0.0;
        for (int m = -1; m <= 1; ++m) {
          const double c = target.lower_edge(j) + m * kTwoPi, d = c + target.width();
          overlap += std::max(0.0, std::min(b, d) - std::max(a, c));
        }
        out[j] += hist_[k] * overlap / bins_.width();
      }
    }
    return out;
  }

 private:
  static void check_weight(double w) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("angle measure weights must be finite and nonnegative");
  }
  void check_mass() const {
    if (mass() > 1.0 + 1e-12)
      throw std::invalid_argument("angle measure has total mass " + std::to_string(mass()) + " > 1");
  }

  std::vector<AngleAtom> atoms_;
  AngleBins bins_;
  std::vector<double> hist_;
};

}  // namespace aep
