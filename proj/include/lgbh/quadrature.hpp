#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "lgbh/errors.hpp"

namespace lgbh {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order() const { return static_cast<int>(nodes.size()); }
};

namespace detail {

inline GaussLegendreRule make_gauss_legendre(int n) {
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace detail

/// Cached, thread-safe access to the n-point Gauss-Legendre rule.
inline const GaussLegendreRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussLegendreRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussLegendreRule>(detail::make_gauss_legendre(n));
  return *slot;
}

struct QuadratureResult {
  double value = 0.0;
  int order = 0;  // node count of the accepted estimate
};

constexpr int kQuadratureStartOrder = 16;
constexpr int kQuadratureMaxOrder = 1 << 14;

/// Fixed-order Gauss-Legendre estimate of the integral of f over [a, b].
/// Also accumulates the integral of |f| into *abs_integral when given.
template <class F>
double gauss_legendre_integrate(F&& f, double a, double b, int order,
                                double* abs_integral = nullptr) {
  const auto& rule = gauss_legendre(order);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0, abs_sum = 0.0;
  for (int i = 0; i < rule.order(); ++i) {
    const double v = rule.weights[i] * f(mid + half * rule.nodes[i]);
    sum += v;
    abs_sum += std::abs(v);
  }
  if (abs_integral) *abs_integral = abs_sum * std::abs(half);
  return sum * half;
}

/// Gauss-Legendre with order doubling until two successive estimates agree to
/// `rel_tol` relative to max(integral of |f|, abs_floor). The integral of |f|
/// equals |I| for integrands of one sign; abs_floor keeps integrands that are
/// pure rounding noise from chasing their own noise.
/// Throws QuadratureNotConverged past max_order nodes.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol = 1e-10,
                                    double abs_floor = 0.0,
                                    int start_order = kQuadratureStartOrder,
                                    int max_order = kQuadratureMaxOrder) {
  int order = start_order;
  double previous = gauss_legendre_integrate(f, a, b, order);
  while (true) {
    order *= 2;
    if (order > max_order) {
      throw QuadratureNotConverged("Gauss-Legendre did not converge within " +
                                   std::to_string(max_order) + " nodes");
    }
    double scale = 0.0;
    const double current = gauss_legendre_integrate(f, a, b, order, &scale);
    if (std::abs(current - previous) <= rel_tol * std::max(scale, abs_floor))
      return {current, order};
    previous = current;
  }
}

}  // namespace lgbh
