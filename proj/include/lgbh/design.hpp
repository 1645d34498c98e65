#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lgbh/couplings.hpp"
#include "lgbh/density.hpp"
#include "lgbh/errors.hpp"
#include "lgbh/modes.hpp"

namespace lgbh {

inline constexpr double pi = std::numbers::pi;

/// Reduces an angle to (-pi, pi].
inline double wrap_angle(double x) {
  double y = std::remainder(x, 2.0 * pi);
  if (y <= -pi) y += 2.0 * pi;
  return y;
}

/// Reduces an angle to [0, 2pi).
inline double wrap_positive(double x) {
  double y = std::fmod(x, 2.0 * pi);
  if (y < 0.0) y += 2.0 * pi;
  if (y >= 2.0 * pi) y = 0.0;
  return y;
}

// Design targets. Phases are the density phases phi_k (radians).

/// Nearest-neighbour chain: c_1 = 1.
struct ChainTarget {
  double phi1 = 0.9 * pi;
};

/// Triangular ladder: c_1 + c_2 = 1 with c_2 / c_1 = ratio.
struct TriangularLadderTarget {
  double phi1 = 0.9 * pi;
  double phi2 = 1.1 * pi;
  double ratio = 1.0 / 3.0;
};

/// Ranges {1, 2, 3}.
struct ExtendedTriangleTarget {
  std::array<double, 3> phases{0.9 * pi, 1.1 * pi, 1.02 * pi};
  std::array<double, 3> weights{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
};

/// |t_k| proportional to k^-beta for k = 1..range.
struct PowerLawTarget {
  double beta = 1.0;
  int range = 7;
  bool calibrate = true;
};

/// Plaquette fluxes: theta1 on (1,1,2) triangles, optional theta2 on (1,2,3)
/// triangles. gauge_theta1 fixes the free nearest-neighbour hopping phase.
struct FluxTarget {
  double theta1 = pi;
  std::optional<double> theta2;
  double gauge_theta1 = pi / 2.0;
};

using DesignTarget =
    std::variant<ChainTarget, TriangularLadderTarget, ExtendedTriangleTarget, PowerLawTarget, FluxTarget>;

inline void validate_target(const DesignTarget& target) {
  if (const auto* p = std::get_if<PowerLawTarget>(&target)) {
    if (p->range < 1) throw ValidationError("power-law range K must be >= 1");
    if (!std::isfinite(p->beta)) throw ValidationError("power-law beta must be finite");
  }
  if (const auto* f = std::get_if<FluxTarget>(&target)) {
    if (!std::isfinite(f->theta1) || !std::isfinite(f->gauge_theta1) ||
        (f->theta2 && !std::isfinite(*f->theta2)))
      throw ValidationError("flux angles must be finite");
  }
  if (const auto* l = std::get_if<TriangularLadderTarget>(&target)) {
    if (!(l->ratio >= 0.0) || !std::isfinite(l->ratio))
      throw ValidationError("ladder ratio c2/c1 must be finite and >= 0");
  }
}

/// Density profile for the geometry presets (chain, ladder, extended triangle).
inline DensityProfile preset_profile(const DesignTarget& target, double radius = 4.0) {
  validate_target(target);
  std::vector<Harmonic> hs{{0, 1.0, 0.0}};
  if (const auto* c = std::get_if<ChainTarget>(&target)) {
    hs.push_back({1, 1.0, c->phi1});
  } else if (const auto* l = std::get_if<TriangularLadderTarget>(&target)) {
    hs.push_back({1, 1.0 / (1.0 + l->ratio), l->phi1});
    hs.push_back({2, l->ratio / (1.0 + l->ratio), l->phi2});
  } else if (const auto* e = std::get_if<ExtendedTriangleTarget>(&target)) {
    for (int k = 1; k <= 3; ++k) hs.push_back({k, e->weights[k - 1], e->phases[k - 1]});
  } else {
    throw ValidationError("preset_profile needs a chain, ladder or extended-triangle target");
  }
  DensityProfile profile(radius, std::move(hs));
  validate_nonnegative(profile);
  return profile;
}

/// Largest amplitude A such that 1 + A * sum_k w_k cos(k phi + phi_k) stays
/// non-negative, by bisection against validate_nonnegative.
inline double max_modulation_amplitude(const std::vector<Harmonic>& shape, double radius) {
  std::vector<Harmonic> hs{{0, 1.0, 0.0}};
  double total = 0.0;
  for (const auto& h : shape) {
    hs.push_back(h);
    total += std::abs(h.c);
  }
  if (total == 0.0) throw NonPhysicalDensity(0.0);
  const DensityProfile unit(radius, hs);
  auto passes = [&](double a) {
    try {
      validate_nonnegative(scale_modulation(unit, a));
      return true;
    } catch (const NonPhysicalDensity&) {
      return false;
    }
  };
  double lo = 1.0 / total;  // accepted by the triangle inequality
  double hi = 2.0 * lo;
  while (passes(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * lo; ++it) {
    const double mid = 0.5 * (lo + hi);
    (passes(mid) ? lo : hi) = mid;
  }
  return lo;
}

/// Power-law hopping design. Uncalibrated: c_k = A k^-beta. Calibrated:
/// c_k = A k^-beta / I_k with I_k the mean radial overlap between the window
/// centre n0 and n0 +- k, so that |t(n0, n0+k)| = |t(n0, n0+1)| k^-beta.
/// A is the largest amplitude keeping the density non-negative; phases are 0.
inline DensityProfile design_power_law(double beta, int range, const ModeWindow& window,
                                       const BeamParameters& beam, bool calibrate,
                                       double radius = 4.0) {
  validate_target(PowerLawTarget{beta, range, calibrate});
  window.validate();
  const DensityProfile disk(radius, {});
  const ModeIndex n0 = window.center();
  std::vector<Harmonic> shape;
  for (int k = 1; k <= range; ++k) {
    double w = std::pow(static_cast<double>(k), -beta);
    if (calibrate) {
      const double up = radial_overlap_t(n0, {n0.l + k, n0.p}, disk, beam).value;
      const double down = radial_overlap_t(n0, {n0.l - k, n0.p}, disk, beam).value;
      const double mean = std::abs(0.5 * (up + down));
      if (mean == 0.0)
        throw ValidationError("radial overlap vanishes at separation " + std::to_string(k));
      w /= mean;
    }
    shape.push_back({k, w, 0.0});
  }
  const double amplitude = max_modulation_amplitude(shape, radius);
  for (auto& h : shape) h.c *= amplitude;
  shape.insert(shape.begin(), Harmonic{0, 1.0, 0.0});
  return {radius, std::move(shape)};
}

/// Least-squares fit of log|t(n0, n0+k)| against log k, k = 1..range.
struct PowerLawFit {
  std::vector<int> k;
  std::vector<double> abs_t;
  std::vector<double> residual;  // log|t_k| minus the fitted line
  std::optional<double> slope;   // empty when fewer than two points
  double intercept = 0.0;
};

inline PowerLawFit fit_power_law(const CouplingSet& cs, int range) {
  PowerLawFit fit;
  const ModeIndex n0 = cs.window.center();
  for (int k = 1; k <= range; ++k) {
    const ModeIndex to{n0.l + k, n0.p};
    if (!cs.window.index_of(to)) break;
    fit.k.push_back(k);
    fit.abs_t.push_back(std::abs(cs.hop(n0, to)));
  }
  const std::size_t n = fit.k.size();
  fit.residual.assign(n, 0.0);
  if (n < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(fit.k[i]), y = std::log(fit.abs_t[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.slope = slope;
  fit.intercept = (sy - slope * sx) / n;
  for (std::size_t i = 0; i < n; ++i)
    fit.residual[i] = std::log(fit.abs_t[i]) - (fit.intercept + slope * std::log(fit.k[i]));
  return fit;
}

/// Hopping phases theta_k = arg t(n, n+k) and the density phases producing them.
struct FluxDesign {
  std::array<double, 3> hop_phase{};  // theta_1..theta_3
  std::array<double, 3> phi{};        // phi_1..phi_3 in [0, 2pi)
  int ranges = 2;                     // 2 without theta2, 3 with it
};

/// Solves Theta_1 = 2 theta_1 - theta_2 and Theta_2 = theta_1 + theta_2 - theta_3
/// with theta_1 fixed by the gauge. A hop l -> l+k carries phase -phi_k for
/// p = 0 modes (positive radial overlaps), so phi_k = -theta_k.
inline FluxDesign design_fluxes(double theta1, std::optional<double> theta2,
                                double gauge_theta1 = pi / 2.0) {
  validate_target(FluxTarget{theta1, theta2, gauge_theta1});
  FluxDesign d;
  d.hop_phase[0] = gauge_theta1;
  d.hop_phase[1] = 2.0 * gauge_theta1 - theta1;
  if (theta2) {
    d.hop_phase[2] = d.hop_phase[0] + d.hop_phase[1] - *theta2;
    d.ranges = 3;
  }
  for (int k = 0; k < d.ranges; ++k) {
    d.hop_phase[k] = wrap_angle(d.hop_phase[k]);
    d.phi[k] = wrap_positive(-d.hop_phase[k]);
  }
  return d;
}

/// Profile realizing a flux design: ladder weights (3/4, 1/4) for two
/// ranges, equal weights 1/3 for three.
inline DensityProfile flux_profile(const FluxDesign& d, double radius = 4.0) {
  if (d.ranges == 2)
    return preset_profile(TriangularLadderTarget{d.phi[0], d.phi[1], 1.0 / 3.0}, radius);
  return preset_profile(ExtendedTriangleTarget{{d.phi[0], d.phi[1], d.phi[2]}, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}},
                        radius);
}

/// Profile for any design target.
inline DensityProfile design_profile(const DesignTarget& target, const ModeWindow& window,
                                     const BeamParameters& beam, double radius = 4.0) {
  if (const auto* p = std::get_if<PowerLawTarget>(&target))
    return design_power_law(p->beta, p->range, window, beam, p->calibrate, radius);
  if (const auto* f = std::get_if<FluxTarget>(&target))
    return flux_profile(design_fluxes(f->theta1, f->theta2, f->gauge_theta1), radius);
  return preset_profile(target, radius);
}

constexpr double kMinPlaquetteHop = 1e-12;

/// Sum of hop phases arg t(c_i, c_{i+1}) around the closed cycle, in (-pi, pi].
inline double flux_of_plaquette(const CouplingSet& cs, const std::vector<ModeIndex>& cycle) {
  if (cycle.size() < 2) throw BrokenPlaquette("a plaquette needs at least two modes");
  double sum = 0.0;
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const auto& from = cycle[i];
    const auto& to = cycle[(i + 1) % cycle.size()];
    const complex hop = cs.hop(from, to);
    if (std::abs(hop) <= kMinPlaquetteHop)
      throw BrokenPlaquette("hop " + to_string(from) + " -> " + to_string(to) + " vanishes");
    sum += std::arg(hop);
  }
  return wrap_angle(sum);
}

/// Triangles of the ladder within one p sector of the window:
/// shape (1,1,2) is n -> n+1 -> n+2 -> n, shape (1,2,3) is n -> n+1 -> n+3 -> n.
enum class PlaquetteShape { nearest, extended };

inline std::vector<std::vector<ModeIndex>> interior_plaquettes(const ModeWindow& window,
                                                               PlaquetteShape shape, int p = 0) {
  const int reach = shape == PlaquetteShape::nearest ? 2 : 3;
  std::vector<std::vector<ModeIndex>> out;
  for (int l = window.l_min; l + reach <= window.l_max; ++l)
    out.push_back({{l, p}, {l + 1, p}, {l + reach, p}});
  return out;
}

}  // namespace lgbh
