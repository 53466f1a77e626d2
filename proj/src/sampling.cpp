#include "qtangent/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qtangent/quadrature.hpp"

namespace qtangent {

UniformStream::UniformStream(const SeedSpec& seed) {
  std::seed_seq seq{std::uint32_t(seed.base_seed), std::uint32_t(seed.base_seed >> 32),
                    std::uint32_t(seed.stream_index), std::uint32_t(seed.stream_index >> 32)};
  engine_.seed(seq);
}

namespace {

struct Cell {
  double a, b, fa, fb, fm;
  double simpson() const { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }
  double trapezoid() const { return 0.5 * (b - a) * (fa + fb); }
};

double checked(const DensityFn& f, double x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    raise(ErrorKind::NonFinite, "density is not finite at x=" + std::to_string(x));
  }
  return std::max(v, 0.0);
}

void chebyshev_nodes(std::vector<double>& out, double lo, double hi, int m) {
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (int j = 0; j < m; ++j) out.push_back(mid - half * std::cos(std::numbers::pi * j / (m - 1)));
}

void focus_nodes(std::vector<double>& out, double lo, double hi, double c, double w, int m) {
  const double u0 = std::atan((lo - c) / w), u1 = std::atan((hi - c) / w);
  for (int j = 0; j < m; ++j) out.push_back(c + w * std::tan(u0 + (u1 - u0) * j / (m - 1)));
}

void half_line_nodes(std::vector<double>& out, double lo, double hi, double w, int m) {
  const double u1 = std::atan(std::sqrt((hi - lo) / w));
  for (int j = 0; j < m; ++j) {
    const double t = std::tan(u1 * j / (m - 1));
    out.push_back(lo + w * t * t);
  }
}

// anchor + sign * d for d = from, 2 from, 4 from, ... up to `to`
void geometric_nodes(std::vector<double>& out, double anchor, double sign, double from, double to) {
  for (double d = from; d < to; d *= 2.0) out.push_back(anchor + sign * d);
  out.push_back(anchor + sign * to);
}

QuadratureOptions tail_options(double tol) { return {0.01 * tol, 1e-8, 20000}; }

double right_tail(const DensityFn& f, double from, double scale, double tol) {
  return integrate_to_infinity(f, from, scale, tail_options(tol)).value;
}

double left_tail(const DensityFn& f, double from, double scale, double tol) {
  auto mirrored = [&](double x) { return f(-x); };
  return integrate_to_infinity(mirrored, -from, scale, tail_options(tol)).value;
}

}  // namespace

CdfTable build_cdf(const DensityFn& density, Support support, const CdfOptions& options) {
  if (options.n < 64) raise(ErrorKind::InvalidParameter, "CDF table needs n >= 64");
  if (!(support.lo < support.hi)) raise(ErrorKind::InvalidParameter, "empty support");
  if (std::isinf(support.lo) && !std::isinf(support.hi)) {
    raise(ErrorKind::InvalidParameter, "supports of the form (-inf, b] are not handled");
  }
  const NodeHint& hint = options.hint;
  const bool focused = hint.scale > 0.0 && std::isfinite(hint.center);
  const double tol = options.tail_mass_tol;

  double lo = support.lo, hi = support.hi;
  double tails = 0.0;
  double scale0 = focused ? hint.scale : 1.0;
  if (std::isinf(hi)) {
    const double anchor = std::isinf(lo) ? (focused ? hint.center : 0.0) : lo;
    double reach = std::max(scale0, focused ? std::abs(hint.center - anchor) + scale0 : 0.0);
    for (int iter = 0;; ++iter) {
      if (iter > 200) raise(ErrorKind::NotNormalized, "tail mass does not fall below tolerance");
      double mass = right_tail(density, anchor + reach, reach, tol);
      if (std::isinf(lo)) mass += left_tail(density, anchor - reach, reach, tol);
      if (mass < tol) {
        tails = mass;
        break;
      }
      reach *= 4.0;
    }
    hi = anchor + reach;
    if (std::isinf(lo)) lo = anchor - reach;
    if (!focused) scale0 = std::isinf(support.lo) ? 1.0 : std::max(1e-300, scale0);
  }

  const int n = options.n;
  std::vector<double> x;
  x.reserve(2 * n + 256);
  if (std::isinf(support.lo)) {
    const double c = focused ? hint.center : 0.0;
    const double core = std::min({hi - c, c - lo, 64.0 * scale0});
    focus_nodes(x, c - core, c + core, c, scale0, n);
    geometric_nodes(x, c, 1.0, core, hi - c);
    geometric_nodes(x, c, -1.0, core, c - lo);
  } else {
    const int m = focused ? n / 2 : n;
    double core_hi = hi;
    if (std::isinf(support.hi)) {
      const double reach = focused ? std::abs(hint.center - lo) : 0.0;
      const double core = std::min(hi - lo, std::max(64.0 * scale0, 4.0 * reach));
      core_hi = lo + core;
      half_line_nodes(x, lo, core_hi, scale0, m);
      geometric_nodes(x, lo, 1.0, core, hi - lo);
    } else {
      chebyshev_nodes(x, lo, hi, m);
    }
    if (focused) focus_nodes(x, lo, core_hi, std::clamp(hint.center, lo, core_hi), hint.scale, n - m);
  }
  std::sort(x.begin(), x.end());
  std::vector<double> nodes;
  for (double v : x) {
    v = std::clamp(v, lo, hi);
    if (nodes.empty() || v - nodes.back() > 4e-16 * std::max(std::abs(v), std::abs(nodes.back()))) {
      nodes.push_back(v);
    }
  }
  nodes.back() = hi;

  std::vector<Cell> cells;
  cells.reserve(nodes.size());
  double fa = checked(density, nodes[0]);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = nodes[i], b = nodes[i + 1];
    const double fb = checked(density, b);
    cells.push_back({a, b, fa, fb, checked(density, 0.5 * (a + b))});
    fa = fb;
  }

  const double cell_tol = options.refine_tol / n;
  const std::size_t max_cells = std::size_t(options.max_refine_factor) * std::size_t(n);
  for (int pass = 0; pass < 40 && cells.size() < max_cells; ++pass) {
    std::vector<Cell> next;
    next.reserve(cells.size() * 2);
    bool split = false;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const Cell& c = cells[i];
      const double m = 0.5 * (c.a + c.b);
      const bool room = next.size() + (cells.size() - i) < max_cells;
      // Three samples of a square-root edge can look linear; such cells are
      // split on mass instead.
      const bool edge = (c.fa == 0.0) != (c.fb == 0.0) && c.simpson() > cell_tol;
      if (room && m > c.a && m < c.b && (edge || std::abs(c.simpson() - c.trapezoid()) > cell_tol)) {
        next.push_back({c.a, m, c.fa, c.fm, checked(density, 0.5 * (c.a + m))});
        next.push_back({m, c.b, c.fm, c.fb, checked(density, 0.5 * (m + c.b))});
        split = true;
      } else {
        next.push_back(c);
      }
    }
    cells.swap(next);
    if (!split) break;
  }

  CdfTable table;
  const Eigen::Index size = Eigen::Index(cells.size()) + 1;
  table.nodes.resize(size);
  table.cdf_values.resize(size);
  table.density.resize(size);
  double total = 0.0;
  table.nodes(0) = cells.front().a;
  table.density(0) = cells.front().fa;
  table.cdf_values(0) = 0.0;
  for (Eigen::Index i = 0; i + 1 < size; ++i) {
    const Cell& c = cells[std::size_t(i)];
    total += c.simpson();
    table.nodes(i + 1) = c.b;
    table.density(i + 1) = c.fb;
    table.cdf_values(i + 1) = total;
  }
  table.raw_mass = total + tails;
  if (!(std::abs(table.raw_mass - 1.0) <= 1e-4)) {
    raise(ErrorKind::NotNormalized, "density integrates to " + std::to_string(table.raw_mass));
  }
  table.cdf_values /= total;
  table.cdf_values(size - 1) = 1.0;
  table.support = {lo, hi};
  return table;
}

namespace {

Eigen::Index cell_of(const Eigen::ArrayXd& edges, double v) {
  const double* begin = edges.data();
  const double* end = begin + edges.size();
  const Eigen::Index i = Eigen::Index(std::upper_bound(begin, end, v) - begin) - 1;
  return std::clamp<Eigen::Index>(i, 0, edges.size() - 2);
}

}  // namespace

double CdfTable::cdf(double x) const {
  if (x <= nodes(0)) return 0.0;
  if (x >= nodes(size() - 1)) return 1.0;
  const Eigen::Index i = cell_of(nodes, x);
  const double h = nodes(i + 1) - nodes(i);
  const double s = (x - nodes(i)) / h;
  const double f0 = density(i), f1 = density(i + 1);
  const double r = f0 + f1 > 0.0 ? (f0 * s + 0.5 * (f1 - f0) * s * s) / (0.5 * (f0 + f1)) : s;
  return cdf_values(i) + r * (cdf_values(i + 1) - cdf_values(i));
}

double sample(const CdfTable& table, double u) {
  const Eigen::Index i = cell_of(table.cdf_values, u);
  const double c0 = table.cdf_values(i), c1 = table.cdf_values(i + 1);
  const double x0 = table.nodes(i), x1 = table.nodes(i + 1);
  const double mass = c1 - c0;
  if (!(mass > 0.0)) return x0;
  const double r = std::clamp((u - c0) / mass, 0.0, 1.0);
  const double f0 = table.density(i), f1 = table.density(i + 1);
  double s = r;
  if (f0 + f1 > 0.0) {
    const double root = std::sqrt((1.0 - r) * f0 * f0 + r * f1 * f1);
    s = f0 + root > 0.0 ? r * (f0 + f1) / (f0 + root) : r;
  }
  return x0 + std::clamp(s, 0.0, 1.0) * (x1 - x0);
}

}  // namespace qtangent
