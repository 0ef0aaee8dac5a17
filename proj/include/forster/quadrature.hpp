#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <queue>
#include <span>
#include <vector>

namespace forster {

struct QuadratureOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-12;
  int max_intervals = 4000;
};

struct QuadratureResult {
  std::complex<double> value;
  double error = 0.0;
  int evaluations = 0;
  int intervals = 0;
  bool converged = false;
};

namespace gk15 {

// Kronrod abscissae on [0, 1]; odd indices are the 7-point Gauss nodes.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a = 0.0;
  double b = 0.0;
  std::complex<double> kronrod;
  double error = 0.0;
};

/// Evaluates one 15-point panel. `batch(x, re, im)` fills the integrand at all nodes at once.
template <class Batch>
Panel panel(Batch& batch, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 15> x;
  for (int i = 0; i < 7; ++i) {
    x[i] = center - half * kNodes[i];
    x[14 - i] = center + half * kNodes[i];
  }
  x[7] = center;
  std::array<double, 15> re{};
  std::array<double, 15> im{};
  batch(std::span<const double>(x), std::span<double>(re), std::span<double>(im));
  std::complex<double> k = kKronrodWeights[7] * std::complex<double>(re[7], im[7]);
  std::complex<double> g = kGaussWeights[3] * std::complex<double>(re[7], im[7]);
  for (int i = 0; i < 7; ++i) {
    const std::complex<double> pair(re[i] + re[14 - i], im[i] + im[14 - i]);
    k += kKronrodWeights[i] * pair;
    if (i % 2 == 1) g += kGaussWeights[i / 2] * pair;
  }
  return {a, b, half * k, std::abs(half * (k - g))};
}

}  // namespace gk15

/// Globally adaptive Gauss-Kronrod (7/15) integration of a complex integrand over the
/// consecutive intervals defined by `breakpoints` (sorted, at least two entries). The
/// interval with the largest error estimate is bisected until
///   total error <= max(abs_tol, rel_tol * |integral|)
/// or max_intervals is reached (converged = false).
template <class Batch>
QuadratureResult integrate_adaptive(Batch&& batch, std::span<const double> breakpoints,
                                    const QuadratureOptions& opts = {}) {
  const auto worse = [](const gk15::Panel& p, const gk15::Panel& q) { return p.error < q.error; };
  std::priority_queue<gk15::Panel, std::vector<gk15::Panel>, decltype(worse)> heap(worse);
  QuadratureResult res;
  std::complex<double> total{0.0, 0.0};
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i + 1] > breakpoints[i])) continue;
    auto p = gk15::panel(batch, breakpoints[i], breakpoints[i + 1]);
    res.evaluations += 15;
    total += p.kronrod;
    total_err += p.error;
    heap.push(p);
  }
  while (!heap.empty()) {
    const double tol = std::max(opts.abs_tol, opts.rel_tol * std::abs(total));
    if (total_err <= tol) {
      res.converged = true;
      break;
    }
    if (static_cast<int>(heap.size()) >= opts.max_intervals) break;
    const gk15::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;  // interval cannot be split further in double precision
    }
    auto left = gk15::panel(batch, worst.a, mid);
    auto right = gk15::panel(batch, mid, worst.b);
    res.evaluations += 30;
    total += left.kronrod + right.kronrod - worst.kronrod;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from the final panels to avoid drift from the running updates.
  std::vector<gk15::Panel> panels;
  panels.reserve(heap.size());
  while (!heap.empty()) {
    panels.push_back(heap.top());
    heap.pop();
  }
  std::sort(panels.begin(), panels.end(), [](const gk15::Panel& p, const gk15::Panel& q) { return p.a < q.a; });
  res.value = {0.0, 0.0};
  res.error = 0.0;
  for (const auto& p : panels) {
    res.value += p.kronrod;
    res.error += p.error;
  }
  res.intervals = static_cast<int>(panels.size());
  if (!res.converged) res.converged = res.error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(res.value));
  return res;
}

}  // namespace forster
