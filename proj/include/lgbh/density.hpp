#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lgbh/errors.hpp"

namespace lgbh {

/// One cosine term c_k cos(k phi + phi_k) of the angular density.
struct Harmonic {
  int k = 0;
  double c = 0.0;
  double phi = 0.0;

  friend bool operator==(const Harmonic&, const Harmonic&) = default;
};

/// Tolerance below zero still accepted as a non-negative density.
constexpr double kNegativeTolerance = 1e-9;
constexpr int kDensitySamples = 4096;

/// Molecular cloud density: a hard disk of radius R times a finite cosine
/// series in the azimuthal angle. Harmonics are kept sorted by k and always
/// contain a k = 0 entry.
class DensityProfile {
 public:
  DensityProfile() : DensityProfile(4.0, {}) {}

  DensityProfile(double radius, std::vector<Harmonic> harmonics)
      : radius_(radius), harmonics_(std::move(harmonics)) {
    if (!(radius_ > 0.0) || !std::isfinite(radius_))
      throw ValidationError("density radius must be positive and finite");
    std::sort(harmonics_.begin(), harmonics_.end(),
              [](const Harmonic& a, const Harmonic& b) { return a.k < b.k; });
    for (std::size_t i = 0; i < harmonics_.size(); ++i) {
      const auto& h = harmonics_[i];
      if (h.k < 0) throw ValidationError("harmonic order k must be >= 0");
      if (!std::isfinite(h.c) || !std::isfinite(h.phi))
        throw ValidationError("harmonic k=" + std::to_string(h.k) + " is not finite");
      if (i > 0 && harmonics_[i - 1].k == h.k)
        throw ValidationError("duplicate harmonic order k=" + std::to_string(h.k));
    }
    if (harmonics_.empty() || harmonics_.front().k != 0)
      harmonics_.insert(harmonics_.begin(), Harmonic{0, 1.0, 0.0});
  }

  double radius() const { return radius_; }
  const std::vector<Harmonic>& harmonics() const { return harmonics_; }

  /// Highest harmonic order with a nonzero amplitude.
  int max_order() const {
    int m = 0;
    for (const auto& h : harmonics_)
      if (h.c != 0.0) m = std::max(m, h.k);
    return m;
  }

  /// Harmonic of order k, or nullptr when absent.
  const Harmonic* find(int k) const {
    for (const auto& h : harmonics_)
      if (h.k == k) return &h;
    return nullptr;
  }

  bool is_active(int k) const {
    const auto* h = find(k);
    return h && h->c != 0.0;
  }

  /// Angular factor sum_k c_k cos(k phi + phi_k).
  double angular(double phi) const {
    double sum = 0.0;
    for (const auto& h : harmonics_) sum += h.c * std::cos(h.k * phi + h.phi);
    return sum;
  }

  double angular_derivative(double phi) const {
    double sum = 0.0;
    for (const auto& h : harmonics_) sum -= h.c * h.k * std::sin(h.k * phi + h.phi);
    return sum;
  }

  friend bool operator==(const DensityProfile&, const DensityProfile&) = default;

 private:
  double radius_;
  std::vector<Harmonic> harmonics_;
};

inline double density_at(const DensityProfile& profile, double r, double phi) {
  return r <= profile.radius() ? profile.angular(phi) : 0.0;
}

/// Physical rotation by alpha about the beam axis: the rotated cloud at phi
/// equals the original at phi - alpha, i.e. phi_k -> phi_k - k alpha.
inline DensityProfile rotate(const DensityProfile& profile, double alpha) {
  auto hs = profile.harmonics();
  for (auto& h : hs) h.phi -= h.k * alpha;
  return {profile.radius(), std::move(hs)};
}

/// Multiplies every c_k with k >= 1 by s; the constant term is untouched.
inline DensityProfile scale_modulation(const DensityProfile& profile, double s) {
  auto hs = profile.harmonics();
  for (auto& h : hs)
    if (h.k > 0) h.c *= s;
  return {profile.radius(), std::move(hs)};
}

/// Global minimum over phi of the angular factor: dense sampling followed by
/// golden-section refinement around each sampled local minimum.
inline double angular_minimum(const DensityProfile& profile) {
  constexpr int n = kDensitySamples;
  const double step = 2.0 * std::numbers::pi / n;
  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) values[i] = profile.angular(i * step);

  double best = *std::min_element(values.begin(), values.end());
  const double inv_golden = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < n; ++i) {
    const double v = values[i];
    if (v > values[(i + n - 1) % n] || v > values[(i + 1) % n]) continue;
    double a = (i - 1) * step, b = (i + 1) * step;
    double x1 = b - inv_golden * (b - a), x2 = a + inv_golden * (b - a);
    double f1 = profile.angular(x1), f2 = profile.angular(x2);
    for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - inv_golden * (b - a);
        f1 = profile.angular(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + inv_golden * (b - a);
        f2 = profile.angular(x2);
      }
    }
    best = std::min({best, f1, f2});
  }
  return best;
}

/// Checks rho >= -kNegativeTolerance everywhere and returns the minimum of the
/// angular factor. When every phase with k >= 1 is zero and
/// sum_{k>=1} |c_k| <= c_0, the profile is accepted without a search and the
/// returned value is the lower bound c_0 cos(phi_0) - sum_{k>=1} |c_k|.
/// Throws NonPhysicalDensity otherwise.
inline double validate_nonnegative(const DensityProfile& profile) {
  const auto& hs = profile.harmonics();
  const double constant = hs.front().c * std::cos(hs.front().phi);
  bool zero_phases = true;
  double modulation = 0.0;
  for (const auto& h : hs) {
    if (h.k == 0) continue;
    zero_phases = zero_phases && h.phi == 0.0;
    modulation += std::abs(h.c);
  }
  if (zero_phases && modulation <= constant) return constant - modulation;

  const double minimum = angular_minimum(profile);
  if (minimum < -kNegativeTolerance) throw NonPhysicalDensity(minimum);
  return minimum;
}

}  // namespace lgbh
