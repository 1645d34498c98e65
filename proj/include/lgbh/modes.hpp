#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdlib>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgbh/errors.hpp"
#include "lgbh/quadrature.hpp"

namespace lgbh {

using complex = std::complex<double>;

/// Laguerre-Gaussian mode label: azimuthal index l (any sign) and radial
/// index p >= 0. Modes are the sites of the effective lattice.
struct ModeIndex {
  int l = 0;
  int p = 0;

  friend bool operator==(const ModeIndex&, const ModeIndex&) = default;
  friend auto operator<=>(const ModeIndex&, const ModeIndex&) = default;

  /// Mode order |l| + 2p.
  int order() const { return std::abs(l) + 2 * p; }
};

inline std::string to_string(const ModeIndex& m) {
  return "(" + std::to_string(m.l) + "," + std::to_string(m.p) + ")";
}

enum class InteractionSign { attractive, repulsive };

/// Beam geometry and the absorbed physical prefactors. Energies are in units
/// of first_order_scale and lengths in units of the waist when left at their
/// defaults.
struct BeamParameters {
  double waist = 1.0;
  double gouy_rate = 0.0;          // detuning per unit mode order
  double longitudinal_fill = 1.0;  // (z2 - z1) / L
  double first_order_scale = 1.0;
  double second_order_scale = 0.01;
  InteractionSign interaction = InteractionSign::attractive;

  /// +1 for attractive (ground-state perturbation theory), -1 for repulsive.
  double interaction_sign() const {
    return interaction == InteractionSign::attractive ? 1.0 : -1.0;
  }

  void validate() const {
    if (!(waist > 0.0) || !std::isfinite(waist))
      throw ValidationError("beam waist must be positive and finite");
    for (double v : {gouy_rate, longitudinal_fill, first_order_scale, second_order_scale})
      if (!std::isfinite(v)) throw ValidationError("beam parameters must be finite");
    if (longitudinal_fill < 0.0) throw ValidationError("longitudinal_fill must be >= 0");
    if (second_order_scale < 0.0)
      throw ValidationError("second_order_scale must be >= 0; use the interaction flag for the sign");
  }
};

/// Largest |l| + p accepted by the normalization and profile routines.
constexpr int kMaxModeOrder = 1000;

inline void check_mode(const ModeIndex& m) {
  if (m.p < 0) throw ValidationError("radial index p must be >= 0, got " + std::to_string(m.p));
  if (std::abs(m.l) + m.p > kMaxModeOrder)
    throw ValidationError("mode " + to_string(m) + " exceeds the supported order " +
                          std::to_string(kMaxModeOrder));
}

/// Associated Laguerre polynomial L_p^a(x) by the three-term recurrence.
inline double laguerre(int p, int a, double x) {
  if (p == 0) return 1.0;
  double prev = 1.0;
  double curr = 1.0 + a - x;
  for (int k = 1; k < p; ++k) {
    const double next = ((2.0 * k + 1.0 + a - x) * curr - (k + a) * prev) / (k + 1.0);
    prev = curr;
    curr = next;
  }
  return curr;
}

/// log C_{l,p}. Stays finite up to kMaxModeOrder where C itself underflows.
inline double log_normalization_constant(const ModeIndex& mode) {
  check_mode(mode);
  const int al = std::abs(mode.l);
  const double log_ratio = std::lgamma(mode.p + 1.0) - std::lgamma(mode.p + al + 1.0);
  return 0.5 * (std::log(2.0 / std::numbers::pi) + log_ratio);
}

/// C_{l,p} = sqrt(2 p! / (pi (p+|l|)!)), evaluated through log-factorials.
inline double normalization_constant(const ModeIndex& mode) {
  return std::exp(log_normalization_constant(mode));
}

/// Real radial factor g(r) of the waist-plane mode, so that
/// mode_amplitude = g(r) exp(-i l phi).
inline double radial_profile(const ModeIndex& mode, double r, double waist) {
  const int al = std::abs(mode.l);
  const double s = r / waist;
  const double x = 2.0 * s * s;
  const double lag = laguerre(mode.p, al, x);
  const double log_c = log_normalization_constant(mode);
  if (s == 0.0) return al == 0 ? std::exp(log_c) * lag / waist : 0.0;
  // C (s sqrt2)^|l| exp(-s^2) in log form to avoid overflow at large |l|.
  const double log_envelope = log_c + al * std::log(s * std::numbers::sqrt2) - s * s;
  return std::exp(log_envelope) * lag / waist;
}

/// Transverse-normalized LG profile in the waist plane, convention exp(-i l phi).
inline complex mode_amplitude(const ModeIndex& mode, double r, double phi,
                              const BeamParameters& beam) {
  return std::polar(1.0, -mode.l * phi) * radial_profile(mode, r, beam.waist);
}

/// delta_{l,p} = gouy_rate * (|l| + 2p).
inline double mode_detuning(const ModeIndex& mode, const BeamParameters& beam) {
  return beam.gouy_rate * mode.order();
}

/// Radius beyond which every mode in `modes` is negligible (Gaussian tail
/// below ~e^-60 of the peak).
inline double plane_cutoff(std::span<const ModeIndex> modes, double waist) {
  int max_order = 0;
  for (const auto& m : modes) max_order = std::max(max_order, m.order());
  return waist * (std::sqrt(max_order + 1.0) + 6.0);
}

/// Overlap integral of f_a f_b^* over the whole transverse plane, by a
/// tensor-product rule: trapezoid in phi, adaptive Gauss-Legendre in r.
inline complex plane_overlap(const ModeIndex& a, const ModeIndex& b, const BeamParameters& beam,
                             double r_max) {
  const int n_phi = 8 * (std::abs(a.l) + std::abs(b.l)) + 64;
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  auto angular = [&](double r) {
    complex sum = 0.0;
    for (int j = 0; j < n_phi; ++j) {
      const double phi = j * dphi;
      sum += mode_amplitude(a, r, phi, beam) * std::conj(mode_amplitude(b, r, phi, beam));
    }
    return sum * dphi * r;
  };
  // Unit-norm modes: overlaps are O(1), so an absolute floor of 1 is natural.
  const auto re = integrate_adaptive([&](double r) { return angular(r).real(); }, 0.0, r_max,
                                     1e-10, 1.0);
  const auto im = integrate_adaptive([&](double r) { return angular(r).imag(); }, 0.0, r_max,
                                     1e-10, 1.0);
  return {re.value, im.value};
}

/// Gram matrix of the given modes over the transverse plane; the identity
/// for an orthonormal set.
inline Eigen::MatrixXcd gram_matrix(std::span<const ModeIndex> modes, const BeamParameters& beam) {
  const double r_max = plane_cutoff(modes, beam.waist);
  const auto n = static_cast<Eigen::Index>(modes.size());
  Eigen::MatrixXcd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      gram(i, j) = plane_overlap(modes[i], modes[j], beam, r_max);
      gram(j, i) = std::conj(gram(i, j));
    }
  }
  return gram;
}

}  // namespace lgbh
