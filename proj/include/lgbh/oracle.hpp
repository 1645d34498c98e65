#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <string>

#include "lgbh/density.hpp"
#include "lgbh/errors.hpp"
#include "lgbh/modes.hpp"
#include "lgbh/quadrature.hpp"

namespace lgbh {

enum class CouplingKind { t, U, mu };

inline const char* to_string(CouplingKind kind) {
  switch (kind) {
    case CouplingKind::t: return "t";
    case CouplingKind::U: return "U";
    case CouplingKind::mu: return "mu";
  }
  return "?";
}

/// Brute-force reference for a single coupling coefficient: the full 2D
/// integral of rho(r, phi) times the mode product over the disk, evaluated
/// point-wise from density_at and mode_amplitude with no separation of
/// variables. Gauss-Legendre in r (orders doubled until two estimates agree to
/// 1e-10 of the integral of |integrand|) times the periodic trapezoid rule in phi.
/// For kind mu the second mode is ignored.
inline complex brute_force_coupling(const ModeIndex& a, const ModeIndex& b, CouplingKind kind,
                                    const DensityProfile& profile, const BeamParameters& beam) {
  check_mode(a);
  check_mode(b);
  const int n_phi = 8 * (std::abs(a.l) + std::abs(b.l) + profile.max_order()) + 64;
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  const double radius = profile.radius();

  auto integrand = [&](double r, double phi) -> complex {
    const double rho = density_at(profile, r, phi);
    const complex fa = mode_amplitude(a, r, phi, beam);
    switch (kind) {
      case CouplingKind::mu: return rho * std::norm(fa);
      case CouplingKind::t: return rho * fa * std::conj(mode_amplitude(b, r, phi, beam));
      case CouplingKind::U: return rho * std::norm(fa) * std::norm(mode_amplitude(b, r, phi, beam));
    }
    return 0.0;
  };

  auto estimate = [&](int order, double& magnitude) {
    const auto& rule = gauss_legendre(order);
    const double half = 0.5 * radius;
    complex sum = 0.0;
    magnitude = 0.0;
    for (int i = 0; i < rule.order(); ++i) {
      const double r = half * (rule.nodes[i] + 1.0);
      for (int j = 0; j < n_phi; ++j) {
        const complex v = integrand(r, j * dphi) * r * rule.weights[i];
        sum += v;
        magnitude += std::abs(v);
      }
    }
    magnitude *= half * dphi;
    return sum * half * dphi;
  };

  double magnitude = 0.0;
  int order = kQuadratureStartOrder;
  complex previous = estimate(order, magnitude);
  complex value;
  while (true) {
    order *= 2;
    if (order > kQuadratureMaxOrder)
      throw QuadratureNotConverged("brute-force quadrature did not converge");
    value = estimate(order, magnitude);
    if (std::abs(value - previous) <= 1e-10 * magnitude) break;
    previous = value;
  }

  switch (kind) {
    case CouplingKind::mu:
      return beam.first_order_scale * beam.longitudinal_fill * value + mode_detuning(a, beam);
    case CouplingKind::t: return beam.first_order_scale * beam.longitudinal_fill * value;
    case CouplingKind::U: return beam.second_order_scale * beam.longitudinal_fill * value;
  }
  return value;
}

}  // namespace lgbh
