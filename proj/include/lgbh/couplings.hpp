#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lgbh/density.hpp"
#include "lgbh/errors.hpp"
#include "lgbh/modes.hpp"
#include "lgbh/parallel.hpp"
#include "lgbh/quadrature.hpp"

namespace lgbh {

/// Rectangular block of modes: l in [l_min, l_max] for every listed p.
/// Modes are ordered p-major, then by increasing l.
struct ModeWindow {
  int l_min = -7;
  int l_max = 7;
  std::vector<int> p_values{0};

  friend bool operator==(const ModeWindow&, const ModeWindow&) = default;

  void validate() const {
    if (l_min > l_max) throw ValidationError("mode window needs l_min <= l_max");
    if (p_values.empty()) throw ValidationError("mode window needs at least one p value");
    for (std::size_t i = 0; i < p_values.size(); ++i) {
      if (p_values[i] < 0) throw ValidationError("mode window p values must be >= 0");
      for (std::size_t j = 0; j < i; ++j)
        if (p_values[i] == p_values[j]) throw ValidationError("mode window p values must be distinct");
    }
  }

  int size() const { return (l_max - l_min + 1) * static_cast<int>(p_values.size()); }

  std::vector<ModeIndex> modes() const {
    std::vector<ModeIndex> out;
    out.reserve(size());
    for (int p : p_values)
      for (int l = l_min; l <= l_max; ++l) out.push_back({l, p});
    return out;
  }

  std::optional<int> index_of(const ModeIndex& m) const {
    if (m.l < l_min || m.l > l_max) return std::nullopt;
    for (std::size_t i = 0; i < p_values.size(); ++i)
      if (p_values[i] == m.p) return static_cast<int>(i) * (l_max - l_min + 1) + (m.l - l_min);
    return std::nullopt;
  }

  /// Central mode of the first p sector.
  ModeIndex center() const { return {l_min + (l_max - l_min) / 2, p_values.front()}; }
};

/// Effective Bose-Hubbard coefficients over a mode window.
///   mu: on-site energies including the detuning
///   t:  Hermitian hopping matrix with zero diagonal; t(a, b) is the amplitude
///       of the hop a -> b, i.e. the coefficient of b_b^dagger b_a.
///   U:  symmetric non-negative interaction matrix; the sign lives in beam.
struct CouplingSet {
  ModeWindow window;
  std::vector<ModeIndex> modes;
  Eigen::VectorXd mu;
  Eigen::MatrixXcd t;
  Eigen::MatrixXd U;
  DensityProfile profile;
  BeamParameters beam;
  // Gauss-Legendre node counts used for each radial integral (0 = skipped).
  Eigen::MatrixXi t_orders;
  Eigen::MatrixXi u_orders;

  int size() const { return static_cast<int>(modes.size()); }

  /// Coupling set from explicit coefficient matrices (t must be Hermitian,
  /// U symmetric); used for hand-built models and tests.
  static CouplingSet from_matrices(const ModeWindow& window, Eigen::VectorXd mu, Eigen::MatrixXcd t,
                                   Eigen::MatrixXd U, const BeamParameters& beam = {}) {
    window.validate();
    CouplingSet cs;
    cs.window = window;
    cs.modes = window.modes();
    const auto m = static_cast<Eigen::Index>(cs.modes.size());
    if (mu.size() != m || t.rows() != m || t.cols() != m || U.rows() != m || U.cols() != m)
      throw DimensionMismatch("coefficient matrices do not match the window size");
    if ((t - t.adjoint()).cwiseAbs().maxCoeff() > 0.0) throw ValidationError("t must be Hermitian");
    if ((U - U.transpose()).cwiseAbs().maxCoeff() > 0.0) throw ValidationError("U must be symmetric");
    cs.mu = std::move(mu);
    cs.t = std::move(t);
    cs.t.diagonal().setZero();
    cs.U = std::move(U);
    cs.beam = beam;
    cs.t_orders = Eigen::MatrixXi::Zero(m, m);
    cs.u_orders = Eigen::MatrixXi::Zero(m, m);
    return cs;
  }

  /// Hopping amplitude between two window modes.
  complex hop(const ModeIndex& from, const ModeIndex& to) const {
    const auto i = window.index_of(from), j = window.index_of(to);
    if (!i || !j) throw ValidationError("mode outside the coupling window");
    return t(*i, *j);
  }
};

/// Analytic Fourier coefficient  integral_0^{2pi} rho_ang(phi) exp(-i dl phi) dphi.
///   dl = 0:   2 pi c_0 cos(phi_0)
///   dl = +k:  pi c_k exp(+i phi_k)
///   dl = -k:  pi c_k exp(-i phi_k)
inline complex azimuthal_factor(int delta_l, const DensityProfile& profile) {
  const int k = std::abs(delta_l);
  const auto* h = profile.find(k);
  if (!h || h->c == 0.0) return 0.0;
  if (k == 0) return 2.0 * std::numbers::pi * h->c * std::cos(h->phi);
  return std::numbers::pi * h->c * std::polar(1.0, delta_l > 0 ? h->phi : -h->phi);
}

/// Radial factor of the hopping integral: integral_0^R g_a g_b r dr.
inline QuadratureResult radial_overlap_t(const ModeIndex& a, const ModeIndex& b,
                                         const DensityProfile& profile, const BeamParameters& beam) {
  check_mode(a);
  check_mode(b);
  const double w = beam.waist;
  return integrate_adaptive(
      [&](double r) { return radial_profile(a, r, w) * radial_profile(b, r, w) * r; }, 0.0,
      profile.radius());
}

/// Radial factor of the interaction integral: integral_0^R g_a^2 g_b^2 r dr.
inline QuadratureResult radial_overlap_u(const ModeIndex& a, const ModeIndex& b,
                                         const DensityProfile& profile, const BeamParameters& beam) {
  check_mode(a);
  check_mode(b);
  const double w = beam.waist;
  return integrate_adaptive(
      [&](double r) {
        const double ga = radial_profile(a, r, w), gb = radial_profile(b, r, w);
        return ga * ga * gb * gb * r;
      },
      0.0, profile.radius());
}

/// Computes mu, t and U for every mode pair of the window. Each pair is an
/// independent computation with its own quadrature, so the result does not
/// depend on `threads`.
inline CouplingSet compute_couplings(const ModeWindow& window, const DensityProfile& profile,
                                     const BeamParameters& beam, int threads = 1) {
  window.validate();
  beam.validate();
  validate_nonnegative(profile);

  CouplingSet cs;
  cs.window = window;
  cs.modes = window.modes();
  cs.profile = profile;
  cs.beam = beam;
  const int m = cs.size();
  cs.mu = Eigen::VectorXd::Zero(m);
  cs.t = Eigen::MatrixXcd::Zero(m, m);
  cs.U = Eigen::MatrixXd::Zero(m, m);
  cs.t_orders = Eigen::MatrixXi::Zero(m, m);
  cs.u_orders = Eigen::MatrixXi::Zero(m, m);

  const double g = beam.first_order_scale * beam.longitudinal_fill;
  const double u = beam.second_order_scale * beam.longitudinal_fill;
  const double mean_density = azimuthal_factor(0, profile).real();

  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) pairs.emplace_back(i, j);

  parallel_for(pairs.size(), threads, [&](std::size_t idx) {
    const auto [i, j] = pairs[idx];
    const auto& a = cs.modes[i];
    const auto& b = cs.modes[j];
    const complex ang = azimuthal_factor(a.l - b.l, profile);
    if (ang != 0.0) {
      const auto radial = radial_overlap_t(a, b, profile, beam);
      cs.t_orders(i, j) = cs.t_orders(j, i) = radial.order;
      if (i == j) {
        cs.mu(i) = g * ang.real() * radial.value + mode_detuning(a, beam);
      } else {
        cs.t(i, j) = g * ang * radial.value;
        cs.t(j, i) = std::conj(cs.t(i, j));
      }
    } else if (i == j) {
      cs.mu(i) = mode_detuning(a, beam);
    }
    if (mean_density != 0.0) {
      const auto radial = radial_overlap_u(a, b, profile, beam);
      cs.u_orders(i, j) = cs.u_orders(j, i) = radial.order;
      cs.U(i, j) = cs.U(j, i) = u * mean_density * radial.value;
    }
  });
  return cs;
}

/// Spread of |t(n, n+k)| over all n of one p sector with n+k in the window.
struct TranslationSpread {
  int k = 0;
  int samples = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double relative_spread = 0.0;  // (max - min) / mean, 0 when mean vanishes
};

inline TranslationSpread translation_spread(const CouplingSet& cs, int k, int p) {
  TranslationSpread s;
  s.k = k;
  double sum = 0.0;
  for (int l = cs.window.l_min; l + k <= cs.window.l_max; ++l) {
    const double a = std::abs(cs.hop({l, p}, {l + k, p}));
    if (s.samples == 0) {
      s.min = s.max = a;
    } else {
      s.min = std::min(s.min, a);
      s.max = std::max(s.max, a);
    }
    sum += a;
    ++s.samples;
  }
  if (s.samples > 0) s.mean = sum / s.samples;
  s.relative_spread = s.mean > 0.0 ? (s.max - s.min) / s.mean : 0.0;
  return s;
}

}  // namespace lgbh
