#pragma once

// Globally adaptive 7/15-point Gauss-Kronrod quadrature, plus the variable
// substitutions used for densities with square-root endpoint behavior and
// heavy tails.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include "qtangent/errors.hpp"

namespace qtangent {

struct QuadratureOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

template <typename T>
struct QuadratureResult {
  T value{};
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGK15Weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kG7Weights[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                         0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct Segment {
  double a, b;
  T value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <typename T, typename F>
Segment<T> gauss_kronrod15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(center);
  T kronrod = fc * kGK15Weights[7];
  T gauss = fc * kG7Weights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kGK15Nodes[j];
    const T sum = f(center - dx) + f(center + dx);
    kronrod += sum * kGK15Weights[j];
    if (j % 2 == 1) gauss += sum * kG7Weights[j / 2];
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Integrates f over [a, b] (finite), splitting first at the sorted interior
/// `breaks`. Throws QuadratureFailure when the tolerance is not met within
/// max_intervals subintervals.
template <typename F>
auto integrate(F&& f, double a, double b, const QuadratureOptions& options = {},
               std::vector<double> breaks = {}) {
  using T = std::decay_t<decltype(f(a))>;
  QuadratureResult<T> result;
  if (a == b) return result;
  const double sign = b > a ? 1.0 : -1.0;
  if (b < a) std::swap(a, b);

  std::vector<double> edges{a};
  std::sort(breaks.begin(), breaks.end());
  for (double x : breaks) {
    if (x > edges.back() && x < b) edges.push_back(x);
  }
  edges.push_back(b);

  std::priority_queue<detail::Segment<T>> heap;
  T total{};
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    auto seg = detail::gauss_kronrod15<T>(f, edges[i], edges[i + 1]);
    total += seg.value;
    total_error += seg.error;
    heap.push(seg);
  }
  int evaluations = 15 * int(edges.size() - 1);
  int intervals = int(edges.size() - 1);

  auto done = [&] { return total_error <= std::max(options.abs_tol, options.rel_tol * std::abs(total)); };
  while (!done()) {
    if (intervals >= options.max_intervals) {
      raise(ErrorKind::QuadratureFailure, "error estimate " + std::to_string(total_error) + " after " +
                                              std::to_string(intervals) + " subintervals");
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      raise(ErrorKind::QuadratureFailure, "subinterval collapsed to rounding level");
    }
    auto left = detail::gauss_kronrod15<T>(f, worst.a, mid);
    auto right = detail::gauss_kronrod15<T>(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    evaluations += 30;
    ++intervals;
  }
  // Re-sum to shed the drift of the incremental updates.
  T resummed{};
  double error = 0.0;
  while (!heap.empty()) {
    resummed += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  result.value = resummed * sign;
  result.error = error;
  result.evaluations = evaluations;
  return result;
}

/// Integral over a finite [a, b] of a function with square-root behavior at
/// both ends, via x = a + (b - a)(1 - cos theta) / 2.
template <typename F>
auto integrate_sqrt_endpoints(F&& f, double a, double b, const QuadratureOptions& options = {},
                              const std::vector<double>& breaks = {}) {
  const double half = 0.5 * (b - a);
  auto g = [&](double theta) { return f(a + half * (1.0 - std::cos(theta))) * (half * std::sin(theta)); };
  std::vector<double> mapped;
  for (double x : breaks) {
    if (x > a && x < b) mapped.push_back(std::acos(std::clamp(1.0 - (x - a) / half, -1.0, 1.0)));
  }
  return integrate(g, 0.0, std::numbers::pi, options, mapped);
}

/// Integral over [a, inf) via x = a + scale (v / (1 - v))^2, which removes a
/// square-root endpoint at a and flattens tails between x^-3/2 and x^-2.
template <typename F>
auto integrate_to_infinity(F&& f, double a, double scale, const QuadratureOptions& options = {},
                           const std::vector<double>& breaks = {}) {
  using T = std::decay_t<decltype(f(a))>;
  auto g = [&](double v) -> T {
    if (v >= 1.0) return T{};
    const double w = v / (1.0 - v);
    const double jac = scale * 2.0 * v / ((1.0 - v) * (1.0 - v) * (1.0 - v));
    return f(a + scale * w * w) * jac;
  };
  std::vector<double> mapped;
  for (double x : breaks) {
    if (x > a) {
      const double w = std::sqrt((x - a) / scale);
      mapped.push_back(w / (1.0 + w));
    }
  }
  return integrate(g, 0.0, 1.0, options, mapped);
}

/// Integral over the real line via x = center + scale tan(theta).
template <typename F>
auto integrate_real_line(F&& f, double center, double scale, const QuadratureOptions& options = {},
                         const std::vector<double>& breaks = {}) {
  using T = std::decay_t<decltype(f(center))>;
  const double edge = 0.5 * std::numbers::pi;
  auto g = [&](double theta) -> T {
    const double c = std::cos(theta);
    if (c <= 0.0) return T{};
    return f(center + scale * std::tan(theta)) * (scale / (c * c));
  };
  std::vector<double> mapped;
  for (double x : breaks) mapped.push_back(std::atan((x - center) / scale));
  return integrate(g, -edge, edge, options, mapped);
}

}  // namespace qtangent
