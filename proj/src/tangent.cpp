#include "qtangent/tangent.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include "qtangent/quadrature.hpp"

namespace qtangent {

namespace {

constexpr std::array<std::pair<CaseTag, std::string_view>, 4> kCaseNames{{
    {CaseTag::QouInterior, "qou_interior"},
    {CaseTag::QouBoundary, "qou_boundary"},
    {CaseTag::QbmInterior, "qbm_interior"},
    {CaseTag::QbmBoundary, "qbm_boundary"},
}};

[[noreturn]] void out_of_support(const std::string& what, double value) {
  raise(ErrorKind::OutOfSupport, what + " = " + std::to_string(value) + " is outside the state space");
}

void require_times(double t1, double t2) {
  if (!(t1 >= 0.0) || !(t2 > t1)) {
    raise(ErrorKind::InvalidTime, "need 0 <= t1 < t2, got t1=" + std::to_string(t1) + " t2=" + std::to_string(t2));
  }
}

double bm_edge(double q, double t) { return 2.0 * std::sqrt(t / (1.0 - q)); }

// X = base + scale * y at rescaled time t, with the process time it maps to
struct AffineState {
  double base;
  double scale;
  double time;
  double bound;
};

AffineState state_map(const TangentCase& c, double eps, double t) {
  const QParamsd p(c.q);
  switch (c.tag) {
    case CaseTag::QouInterior:
      return {c.x, eps, eps * t, p.x_plus};
    case CaseTag::QouBoundary:
      return {p.x_minus, eps * eps, eps * t, p.x_plus};
    case CaseTag::QbmInterior:
      return {c.x, eps, c.s + eps * t, bm_edge(c.q, c.s + eps * t)};
    case CaseTag::QbmBoundary: {
      const double a = 1.0 / std::sqrt(c.s * (1.0 - c.q));
      return {c.x - a * t * eps, eps * eps, c.s + eps * t, bm_edge(c.q, c.s + eps * t)};
    }
  }
  raise(ErrorKind::UnknownProcess, "unhandled tangent case");
}

// one row y2 -> rescaled density for fixed (eps, t1, t2, y1)
class RescaledRow {
 public:
  RescaledRow(const TangentCase& c, double eps, double t1, double t2, double y1)
      : end_(state_map(c, eps, t2)), row_(make_row(c, eps, t1, t2, y1)) {}

  double operator()(double y2) const { return end_.scale * row_(end_.base + end_.scale * y2); }
  Support support() const {
    return {(-end_.bound - end_.base) / end_.scale, (end_.bound - end_.base) / end_.scale};
  }

 private:
  static TransitionRow<double> make_row(const TangentCase& c, double eps, double t1, double t2, double y1) {
    c.validate();
    require_times(t1, t2);
    if (!(eps > 0.0)) raise(ErrorKind::InvalidParameter, "eps must be positive");
    const QParamsd p(c.q);
    const AffineState start = state_map(c, eps, t1);
    const double x1 = start.base + start.scale * y1;
    if (!(std::abs(x1) <= start.bound * (1.0 + 1e-12))) out_of_support("start state", x1);
    const double clamped = std::clamp(x1, -start.bound, start.bound);
    if (c.tag == CaseTag::QouInterior || c.tag == CaseTag::QouBoundary) {
      return TransitionRow<double>::qou(p, eps * (t2 - t1), clamped);
    }
    return TransitionRow<double>::qbm(p, c.s + eps * t1, c.s + eps * t2, clamped);
  }

  AffineState end_;
  TransitionRow<double> row_;
};

struct LimitShape {
  bool cauchy;
  double center;  // Cauchy center, or lower support point
  double gamma;   // Cauchy scale, or tan^2 map scale
};

double interior_scale(const TangentCase& c) {
  if (c.scale_override) return *c.scale_override;
  return c.tag == CaseTag::QouInterior ? c_qx(c.q, c.x) : c_qsx(c.q, c.s, c.x);
}

LimitShape limit_shape(const TangentCase& c, double t1, double t2, double y1) {
  const double dt = t2 - t1;
  switch (c.tag) {
    case CaseTag::QouInterior:
      return {true, y1, interior_scale(c) * dt};
    case CaseTag::QbmInterior:
      return {true, y1 + dt * c.x / (2.0 * c.s), interior_scale(c) * dt};
    case CaseTag::QouBoundary:
      return {false, 0.0, std::max(t2 * t2 / std::sqrt(1.0 - c.q), y1)};
    case CaseTag::QbmBoundary: {
      const double r = std::sqrt(c.s * c.s * c.s * (1.0 - c.q));
      return {false, t2 * t2 / (4.0 * r), std::max(t2 * t2 / r, y1)};
    }
  }
  raise(ErrorKind::UnknownProcess, "unhandled tangent case");
}

}  // namespace

std::string_view to_string(CaseTag tag) {
  for (const auto& [t, name] : kCaseNames) {
    if (t == tag) return name;
  }
  return "unknown";
}

CaseTag parse_case(std::string_view name) {
  for (const auto& [t, label] : kCaseNames) {
    if (label == name) return t;
  }
  raise(ErrorKind::UnknownProcess, "unknown tangent case '" + std::string(name) + "'");
}

TangentCase TangentCase::qou_interior(double q, double x) { return {CaseTag::QouInterior, q, 1.0, x, {}}; }
TangentCase TangentCase::qou_boundary(double q) { return {CaseTag::QouBoundary, q, 1.0, QParamsd(q).x_minus, {}}; }
TangentCase TangentCase::qbm_interior(double q, double s, double x) { return {CaseTag::QbmInterior, q, s, x, {}}; }
TangentCase TangentCase::qbm_boundary(double q, double s) {
  return {CaseTag::QbmBoundary, q, s, -bm_edge(q, s), {}};
}

void TangentCase::validate() const {
  const QParamsd p(q);
  const bool bm = tag == CaseTag::QbmInterior || tag == CaseTag::QbmBoundary;
  if (bm && !(s > 0.0)) raise(ErrorKind::InvalidTime, "q-BM tangent cases need s > 0");
  const double edge = bm ? bm_edge(q, s) : p.x_plus;
  if (is_boundary()) {
    if (x != -edge) raise(ErrorKind::InvalidState, "boundary cases sit at the left endpoint");
  } else if (!(std::abs(x) < edge)) {
    raise(ErrorKind::InvalidState, "interior cases need x inside the open support");
  }
  if (scale_override && !(*scale_override > 0.0)) raise(ErrorKind::InvalidParameter, "scale must be positive");
}

double c_qx(double q, double x) {
  const QParamsd p(q);
  return std::sqrt(std::max(4.0 / (1.0 - p.q) - x * x, 0.0));
}

double c_qsx(double q, double s, double x) {
  const QParamsd p(q);
  if (!(s > 0.0)) raise(ErrorKind::InvalidTime, "c_{q,s,x} needs s > 0");
  return std::sqrt(std::max(4.0 * s / (1.0 - p.q) - x * x, 0.0)) / (2.0 * s);
}

Support rescaled_support(const TangentCase& c, double eps, double t2) {
  c.validate();
  if (!(eps > 0.0)) raise(ErrorKind::InvalidParameter, "eps must be positive");
  const AffineState end = state_map(c, eps, t2);
  return {(-end.bound - end.base) / end.scale, (end.bound - end.base) / end.scale};
}

double rescaled_pdf(const TangentCase& c, double eps, double t1, double t2, double y1, double y2) {
  const RescaledRow row(c, eps, t1, t2, y1);
  const Support sup = row.support();
  if (y2 < sup.lo || y2 > sup.hi) out_of_support("rescaled end state y2", y2);
  return row(y2);
}

double limit_pdf(const TangentCase& c, double t1, double t2, double y1, double y2) {
  c.validate();
  require_times(t1, t2);
  switch (c.tag) {
    case CaseTag::QouInterior: {
      const double k = interior_scale(c);
      return cauchy_transition_pdf(t1, t2, y1 / k, y2 / k) / k;
    }
    case CaseTag::QbmInterior: {
      const double k = interior_scale(c);
      const double drift = c.x / (2.0 * c.s);
      return cauchy_transition_pdf(k * t1, k * t2, y1 - t1 * drift, y2 - t2 * drift);
    }
    case CaseTag::QouBoundary: {
      const double r = std::sqrt(1.0 - c.q);
      if (y1 < 0.0) out_of_support("limit start state y1", y1);
      return biane_half_pdf(2.0 * t1, 2.0 * t2, r * y1 + t1 * t1, r * y2 + t2 * t2) * r;
    }
    case CaseTag::QbmBoundary: {
      const double r = std::sqrt(c.s * c.s * c.s * (1.0 - c.q));
      if (r * y1 < t1 * t1 / 4.0) out_of_support("limit start state y1", y1);
      return biane_half_pdf(t1, t2, r * y1, r * y2) * r;
    }
  }
  raise(ErrorKind::UnknownProcess, "unhandled tangent case");
}

TangentWindow default_window(const TangentCase& c, double t1, double t2, double y1, double coverage) {
  c.validate();
  require_times(t1, t2);
  if (!(coverage > 0.0 && coverage < 1.0)) raise(ErrorKind::InvalidParameter, "coverage must lie in (0, 1)");
  const LimitShape shape = limit_shape(c, t1, t2, y1);
  TangentWindow w{t1, t2, y1, 0.0, 0.0};
  if (shape.cauchy) {
    const double half = shape.gamma * std::tan(0.5 * std::numbers::pi * coverage);
    w.y_lo = shape.center - half;
    w.y_hi = shape.center + half;
    return w;
  }
  auto f = [&](double y) { return limit_pdf(c, t1, t2, y1, y); };
  const double lo = shape.center;
  auto tail = [&](double y) { return integrate_to_infinity(f, y, y - lo, {1e-12, 1e-10, 20000}).value; };
  const double target = 1.0 - coverage;
  double a = lo, b = lo + shape.gamma;
  while (tail(b) > target) {
    a = b;
    b = lo + 2.0 * (b - lo);
  }
  for (int i = 0; i < 80 && (b - a) > 1e-10 * (b - lo); ++i) {
    const double m = 0.5 * (a + b);
    (tail(m) > target ? a : b) = m;
  }
  w.y_lo = lo;
  w.y_hi = b;
  return w;
}

DistanceResult distance(const TangentCase& c, double eps, const TangentWindow& window, int resolution) {
  if (resolution < 3) raise(ErrorKind::InvalidParameter, "resolution must be >= 3");
  if (!(window.y_hi > window.y_lo)) raise(ErrorKind::InvalidParameter, "empty distance window");
  const RescaledRow row(c, eps, window.t1, window.t2, window.y1);
  const Support feasible = row.support();
  const LimitShape shape = limit_shape(c, window.t1, window.t2, window.y1);

  DistanceResult out;
  double lo = window.y_lo, hi = window.y_hi;
  if (c.is_boundary()) {
    // the rescaled lower edge converges to the limit's; integrate from it
    if (feasible.lo > lo) out.shrunk = true;
    lo = feasible.lo;
  } else if (feasible.lo > lo) {
    lo = feasible.lo;
    out.shrunk = true;
  }
  if (feasible.hi < hi) {
    hi = feasible.hi;
    out.shrunk = true;
  }
  if (!(hi > lo)) raise(ErrorKind::OutOfSupport, "window does not meet the rescaled support");
  out.window_lo = lo;
  out.window_hi = hi;

  auto rescaled = [&](double y) { return (y > feasible.lo && y < feasible.hi) ? row(y) : 0.0; };
  auto limit = [&](double y) { return limit_pdf(c, window.t1, window.t2, window.y1, y); };
  const WindowMap map = shape.cauchy ? WindowMap{true, shape.center, shape.gamma} : WindowMap{false, lo, shape.gamma};
  const DistanceResult d = compare_on_window(rescaled, limit, lo, hi, map, resolution);
  out.l1 = d.l1;
  out.sup = d.sup;
  out.tail_remainder = d.tail_remainder;
  return out;
}

DistanceResult compare_on_window(const std::function<double(double)>& f, const std::function<double(double)>& g,
                                 double lo, double hi, const WindowMap& map, int resolution) {
  if (resolution < 3) raise(ErrorKind::InvalidParameter, "resolution must be >= 3");
  if (!(hi > lo) || !(map.gamma > 0.0)) raise(ErrorKind::InvalidParameter, "bad comparison window");
  double u0, u1;
  if (map.cauchy) {
    u0 = std::atan((lo - map.center) / map.gamma);
    u1 = std::atan((hi - map.center) / map.gamma);
  } else {
    if (lo < map.center) raise(ErrorKind::InvalidParameter, "half-line window starts below its base point");
    u0 = std::atan(std::sqrt((lo - map.center) / map.gamma));
    u1 = std::atan(std::sqrt((hi - map.center) / map.gamma));
  }
  DistanceResult out;
  out.window_lo = lo;
  out.window_hi = hi;
  const double h = (u1 - u0) / (resolution - 1);
  double l1 = 0.0, mass = 0.0;
  for (int i = 0; i < resolution; ++i) {
    const double u = i == resolution - 1 ? u1 : u0 + i * h;
    const double t = std::tan(u), cu = std::cos(u);
    double y, jac;
    if (map.cauchy) {
      y = map.center + map.gamma * t;
      jac = map.gamma / (cu * cu);
    } else {
      y = map.center + map.gamma * t * t;
      jac = 2.0 * map.gamma * t / (cu * cu);
    }
    if (i == 0) y = lo;
    if (i == resolution - 1) y = hi;
    const double a = f(y), b = g(y);
    const double wgt = (i == 0 || i == resolution - 1) ? 0.5 * h : h;
    l1 += wgt * std::abs(a - b) * jac;
    mass += wgt * b * jac;
    out.sup = std::max(out.sup, std::abs(a - b));
  }
  out.l1 = l1;
  out.tail_remainder = std::max(0.0, 1.0 - mass);
  return out;
}

ConvergenceReport convergence_study(const TangentCase& c, const std::vector<double>& ladder,
                                    const std::optional<TangentWindow>& window, const StudyOptions& options) {
  if (ladder.empty()) raise(ErrorKind::InvalidParameter, "empty eps ladder");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    if (!(ladder[i] > 0.0) || (i > 0 && !(ladder[i] < ladder[i - 1]))) {
      raise(ErrorKind::InvalidParameter, "eps ladder must be positive and strictly decreasing");
    }
  }
  ConvergenceReport report;
  report.tangent_case = c;
  report.window = window ? *window : default_window(c);
  report.threshold = options.threshold;
  report.slack = options.slack;
  report.resolution = options.resolution;
  for (double eps : ladder) report.ladder.push_back({eps, distance(c, eps, report.window, options.resolution)});
  report.monotone = true;
  for (std::size_t i = 1; i < report.ladder.size(); ++i) {
    if (report.ladder[i].distance.l1 > (1.0 + options.slack) * report.ladder[i - 1].distance.l1) {
      report.monotone = false;
    }
  }
  report.terminal_ok = report.ladder.back().distance.l1 < options.threshold;
  report.verdict = report.monotone && report.terminal_ok;
  return report;
}

double aldous_ratio(double q, double eps, double x, double y1, double t1, double t2) {
  require_times(t1, t2);
  const TangentCase c = TangentCase::qou_interior(q, x);
  const RescaledRow row(c, eps, t1, t2, y1);
  const Support sup = row.support();
  auto f = [&](double y) {
    const double d = y - y1;
    return std::min(d * d, 1.0) * row(y);
  };
  const auto r = integrate_sqrt_endpoints(f, sup.lo, sup.hi, {1e-12, 1e-10, 20000}, {y1 - 1.0, y1, y1 + 1.0});
  return r.value / (t2 - t1);
}

}  // namespace qtangent
