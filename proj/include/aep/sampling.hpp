#pragma once

// Initial profiles, product measures, grand-canonical and canonical sampling.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aep/angle_measure.hpp"
#include "aep/configuration.hpp"
#include "aep/rng.hpp"

namespace aep {

/// Local angle law u -> zeta-hat(u, .) d theta, with strict sub-unit mass.
class InitialProfile {
 public:
  using LocalLaw = std::function<AngleMeasure(double, double)>;

  explicit InitialProfile(LocalLaw law) : law_(std::move(law)) {}

  static InitialProfile constant(AngleMeasure m) {
    return InitialProfile([m = std::move(m)](double, double) { return m; });
  }

  /// Tabulates a density zeta-hat(u1, u2, theta) on `angle_bins` bins.
  static InitialProfile from_density(std::function<double(double, double, double)> zeta_hat, int angle_bins = 256) {
    const AngleBins bins(angle_bins);
    return InitialProfile([zeta_hat = std::move(zeta_hat), bins](double u1, double u2) {
      constexpr int kSub = 8;
      std::vector<double> w(bins.count());
      for (int k = 0; k < bins.count(); ++k) {
        double acc = 0.0;
        for (int q = 0; q < kSub; ++q) acc += zeta_hat(u1, u2, wrap_angle(bins.lower_edge(k) + bins.width() * (q + 0.5) / kSub));
        w[k] = acc * bins.width() / kSub;
      }
      return AngleMeasure::from_histogram(bins, std::move(w));
    });
  }

  /// Two-type profile: density of angle-0 and angle-pi particles.
  static InitialProfile two_type(std::function<double(double, double)> plus, std::function<double(double, double)> minus) {
    return InitialProfile([plus = std::move(plus), minus = std::move(minus)](double u1, double u2) {
      return AngleMeasure::from_atoms({{0.0, plus(u1, u2)}, {kPi, minus(u1, u2)}});
    });
  }

  /// Local law at u; rejects local densities >= 1.
  AngleMeasure at(double u1, double u2) const {
    AngleMeasure m = law_(u1, u2);
    if (!(m.mass() < 1.0))
      throw std::invalid_argument("initial density " + std::to_string(m.mass()) + " at u=(" + std::to_string(u1) + "," +
                                  std::to_string(u2) + ") is not below one");
    return m;
  }

  double density(double u1, double u2) const { return at(u1, u2).mass(); }

 private:
  LocalLaw law_;
};

/// Product measure: site x occupied w.p. zeta(x/N), angle drawn from zeta-hat(x/N, .)/zeta(x/N).
inline Configuration sample_product_measure(const InitialProfile& profile, const TorusGeometry& geom, Rng& rng) {
  if (geom.side() < 2) throw std::invalid_argument("product measure sampling needs N >= 2");
  Configuration c(geom);
  const double n = geom.side();
  for (int s = 0; s < static_cast<int>(geom.site_count()); ++s) {
    const Site p = geom.coords(s);
    const AngleMeasure law = profile.at(p.x / n, p.y / n);
    if (uniform01(rng) < law.mass()) c.place(s, law.sample_angle(rng));
  }
  return c;
}

inline Configuration sample_product_measure(const InitialProfile& profile, const TorusGeometry& geom,
                                            std::uint64_t seed) {
  Rng rng = make_stream(seed, "site-sampler");
  return sample_product_measure(profile, geom, rng);
}

/// I.i.d. sites with P(eta = 1) = alpha and angle law alpha-hat / alpha.
inline Configuration sample_grand_canonical(const AngleMeasure& alpha_hat, int box_side, Rng& rng) {
  const TorusGeometry geom(box_side);
  Configuration c(geom);
  const double alpha = alpha_hat.mass();
  for (int s = 0; s < static_cast<int>(geom.site_count()); ++s)
    if (uniform01(rng) < alpha) c.place(s, alpha_hat.sample_angle(rng));
  return c;
}

/// Particle count and angle multiset in a box.
struct CanonicalState {
  std::vector<double> angles;

  std::size_t count() const noexcept { return angles.size(); }

  /// alpha-hat_K = (1/|B|) sum_k delta_{theta_k}.
  AngleMeasure parameter(std::size_t box_volume) const {
    std::vector<AngleAtom> atoms;
    atoms.reserve(angles.size());
    for (double a : angles) atoms.push_back({a, 1.0 / static_cast<double>(box_volume)});
    return AngleMeasure::from_atoms(std::move(atoms));
  }

  /// The configuration keeps at least two empty sites in a box of this volume.
  bool has_two_holes(std::size_t box_volume) const noexcept { return angles.size() + 2 <= box_volume; }
};

inline CanonicalState canonical_state_of(const Configuration& c, const Box& box) {
  CanonicalState st;
  for_each_box_site(c.geometry(), box, [&](int s) {
    if (c.occupied(s)) st.angles.push_back(c.angle(s));
  });
  return st;
}

/// Canonical measure on a box of side `box_side`: the given angles placed on
/// uniformly chosen distinct sites. Exact because mu*_alpha is exchangeable.
inline Configuration condition_to_canonical(const CanonicalState& state, int box_side, Rng& rng) {
  const TorusGeometry geom(box_side);
  const std::size_t volume = geom.site_count();
  if (state.count() > volume)
    throw std::invalid_argument("canonical state has " + std::to_string(state.count()) + " particles for a box of " +
                                std::to_string(volume) + " sites");
  std::vector<int> sites(volume);
  for (std::size_t i = 0; i < volume; ++i) sites[i] = static_cast<int>(i);
  Configuration c(geom);
  for (std::size_t k = 0; k < state.count(); ++k) {
    const std::size_t j = k + uniform_index(rng, volume - k);
    std::swap(sites[k], sites[j]);
    c.place(sites[k], state.angles[k]);
  }
  return c;
}

/// (1/|B_l|) sum_{x in B_l} eta_x delta_{theta_x}.
inline AngleMeasure empirical_angular_density(const Configuration& c, const Box& box) {
  std::vector<AngleAtom> atoms;
  const double w = 1.0 / static_cast<double>(box.volume());
  for_each_box_site(c.geometry(), box, [&](int s) {
    if (c.occupied(s)) atoms.push_back({c.angle(s), w});
  });
  return AngleMeasure::from_atoms(std::move(atoms));
}

}  // namespace aep
