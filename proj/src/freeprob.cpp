#include "qtangent/freeprob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qtangent/parallel.hpp"
#include "qtangent/quadrature.hpp"

namespace qtangent {

namespace {

constexpr double kSlitTol = 1e-12;
constexpr std::complex<double> kI{0.0, 1.0};

void require_times(double s, double t) {
  if (!(s > 0.0 && std::isfinite(t))) raise(ErrorKind::InvalidTime, "need 0 < s < t");
  if (!(s < t)) raise(ErrorKind::InvalidTime, "need s < t, got s=" + std::to_string(s) + " t=" + std::to_string(t));
}

std::string describe(ComplexPoint z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

template <typename F>
auto integrate_measure(const MeasureDensity& mu, F&& f, const QuadratureOptions& opts,
                       const std::vector<double>& extra) {
  std::vector<double> breaks = mu.breaks;
  breaks.insert(breaks.end(), extra.begin(), extra.end());
  const Support& sup = mu.support;
  if (sup.bounded()) {
    if (mu.sqrt_edges) return integrate_sqrt_endpoints(f, sup.lo, sup.hi, opts, breaks).value;
    return integrate(f, sup.lo, sup.hi, opts, breaks).value;
  }
  if (std::isfinite(sup.lo)) return integrate_to_infinity(f, sup.lo, mu.scale, opts, breaks).value;
  if (std::isfinite(sup.hi)) raise(ErrorKind::InvalidParameter, "left half-line measures are not supported");
  double center = 0.0;
  if (!mu.breaks.empty()) center = mu.breaks.front();
  return integrate_real_line(f, center, mu.scale, opts, breaks).value;
}

}  // namespace

MeasureDensity half_stable_measure(double t) {
  if (!(t > 0.0)) raise(ErrorKind::InvalidTime, "half-stable measure needs t > 0");
  MeasureDensity mu;
  mu.density = [t](double x) { return half_stable_marginal(t, x); };
  mu.support = {t * t / 4.0, std::numeric_limits<double>::infinity()};
  mu.label = "nu_t^(1/2), t=" + std::to_string(t);
  mu.scale = t * t;
  mu.breaks = {t * t / 3.0};  // mode
  return mu;
}

MeasureDensity cauchy_measure(double t) {
  if (!(t > 0.0)) raise(ErrorKind::InvalidTime, "Cauchy measure needs t > 0");
  MeasureDensity mu;
  mu.density = [t](double x) { return cauchy_marginal(t, x); };
  mu.label = "nu_t^(1), t=" + std::to_string(t);
  mu.scale = t;
  mu.breaks = {0.0};
  return mu;
}

MeasureDensity semicircle_measure(double radius) {
  if (!(radius > 0.0)) raise(ErrorKind::InvalidParameter, "semicircle radius must be > 0");
  MeasureDensity mu;
  mu.density = [radius](double x) {
    const double gap = radius * radius - x * x;
    return gap > 0.0 ? 2.0 * std::sqrt(gap) / (std::numbers::pi * radius * radius) : 0.0;
  };
  mu.support = {-radius, radius};
  mu.label = "semicircle, r=" + std::to_string(radius);
  mu.scale = radius;
  return mu;
}

MeasureDensity qnormal_measure(double q) {
  const QParamsd p(q);
  MeasureDensity mu;
  mu.density = [p](double x) { return qnormal_pdf(p, x); };
  mu.support = {p.x_minus, p.x_plus};
  mu.label = "q-normal, q=" + std::to_string(q);
  mu.scale = p.x_plus;
  return mu;
}

MeasureDensity biane_shifted_measure(double s, double t, double x) {
  require_times(s, t);
  if (!(x >= 0.0)) raise(ErrorKind::InvalidState, "shifted Biane start must be >= 0");
  MeasureDensity mu;
  mu.density = [s, t, x](double y) { return biane_shifted_pdf(s, t, x, y); };
  mu.support = {0.0, std::numeric_limits<double>::infinity()};
  mu.label = "p^(1/2)_{s,t}(x,.)";
  const double dt = t - s;
  mu.scale = std::max({x, dt * dt, 1e-3});
  if (x > 0.0) mu.breaks = {x};
  return mu;
}

double measure_mass(const MeasureDensity& mu) {
  QuadratureOptions opts;
  opts.abs_tol = 1e-12;
  opts.rel_tol = 1e-13;
  return integrate_measure(mu, mu.density, opts, {});
}

ComplexPoint cauchy_stieltjes(const MeasureDensity& mu, ComplexPoint z, double abs_tol) {
  if (!(z.imag() > 0.0)) raise(ErrorKind::InvalidParameter, "Cauchy-Stieltjes transform needs im z > 0");
  auto f = [&](double x) -> ComplexPoint { return mu.density(x) / (z - x); };
  QuadratureOptions opts;
  opts.abs_tol = abs_tol;
  opts.rel_tol = 1e-13;
  opts.max_intervals = 20000;
  const double a = z.real();
  const double h = z.imag();
  return integrate_measure(mu, f, opts, {a - h, a, a + h});
}

bool on_slit(ComplexPoint z, double a) { return std::abs(z.imag()) <= kSlitTol && z.real() >= a - kSlitTol; }

ComplexPoint g_half_closed(double t, ComplexPoint z) {
  if (!(t > 0.0)) raise(ErrorKind::InvalidTime, "g_half_closed needs t > 0");
  if (on_slit(z, t * t / 4.0)) raise(ErrorKind::BranchCut, "z=" + describe(z) + " lies on the slit [t^2/4, inf)");
  const ComplexPoint w = std::sqrt(t * t - 4.0 * z) + t;
  return -4.0 / (w * w);
}

ComplexPoint g_half_csk(double t, ComplexPoint z) {
  if (!(t > 0.0)) raise(ErrorKind::InvalidTime, "g_half_csk needs t > 0");
  if (on_slit(z, t * t / 4.0)) raise(ErrorKind::BranchCut, "z=" + describe(z) + " lies on the slit [t^2/4, inf)");
  if (z == 0.0) raise(ErrorKind::InvalidParameter, "unsimplified form is undefined at z = 0");
  return (t * std::sqrt(t * t - 4.0 * z) - t * t + 2.0 * z) / (2.0 * z * z);
}

ComplexPoint g_cauchy(double t, ComplexPoint z) {
  if (!(t > 0.0)) raise(ErrorKind::InvalidTime, "g_cauchy needs t > 0");
  return 1.0 / (z + kI * t);
}

ComplexPoint subordinator_F(double s, double t, ComplexPoint z) {
  require_times(s, t);
  if (on_slit(z, t * t / 4.0)) raise(ErrorKind::BranchCut, "z=" + describe(z) + " lies on the slit [t^2/4, inf)");
  const ComplexPoint w = t - s + std::sqrt(t * t - 4.0 * z);
  return 0.25 * (s * s - w * w);
}

ComplexPoint biane_H(double s, double t, double x, ComplexPoint z) {
  require_times(s, t);
  if (!(x > 0.0)) raise(ErrorKind::InvalidState, "biane_H needs x > 0");
  if (on_slit(z, 0.0)) raise(ErrorKind::BranchCut, "z=" + describe(z) + " lies on the slit [0, inf)");
  const ComplexPoint w = t - s + std::sqrt(-z);
  return 1.0 / (-x - w * w);
}

ComplexPoint r_transform_cauchy(double t, ComplexPoint) {
  if (!(t > 0.0)) raise(ErrorKind::InvalidTime, "r_transform_cauchy needs t > 0");
  return kI * t;
}

ComplexPoint k_cauchy(double t, ComplexPoint w) {
  if (!(t > 0.0)) raise(ErrorKind::InvalidTime, "k_cauchy needs t > 0");
  return 1.0 / w - kI * t;
}

InversionResult stieltjes_invert(const Transform& transform, double y, const std::vector<double>& eps_ladder) {
  if (eps_ladder.size() < 2) raise(ErrorKind::InvalidParameter, "eps ladder needs at least two rungs");
  for (std::size_t k = 0; k < eps_ladder.size(); ++k) {
    if (!(eps_ladder[k] > 0.0) || (k > 0 && !(eps_ladder[k] < eps_ladder[k - 1]))) {
      raise(ErrorKind::InvalidParameter, "eps ladder must be positive and strictly decreasing");
    }
  }
  InversionResult result;
  for (std::size_t k = 0; k < eps_ladder.size(); ++k) {
    const double eps = eps_ladder[k];
    const double raw = -transform({y, eps}).imag() / std::numbers::pi;
    if (!std::isfinite(raw)) raise(ErrorKind::NonFinite, "transform is not finite at eps=" + std::to_string(eps));
    double extrapolated = std::numeric_limits<double>::quiet_NaN();
    if (k > 0) {
      const auto& prev = result.ladder.back();
      extrapolated = raw - eps * (prev.raw - raw) / (prev.eps - eps);
    }
    result.ladder.push_back({eps, raw, extrapolated});
  }
  const auto& l = result.ladder;
  for (std::size_t k = 2; k < l.size(); ++k) {
    const double before = std::abs(l[k - 1].raw - l[k - 2].raw);
    const double now = std::abs(l[k].raw - l[k - 1].raw);
    if (now > before * (1.0 + 1e-9) + 1e-12) {
      raise(ErrorKind::NonConvergentLadder, "raw values diverge at eps=" + std::to_string(l[k].eps));
    }
  }
  result.value = l.back().extrapolated;
  return result;
}

std::string_view to_string(IdentityKind kind) {
  switch (kind) {
    case IdentityKind::Subordination: return "subordination";
    case IdentityKind::Biane3: return "biane3";
    case IdentityKind::Inversion: return "inversion";
    case IdentityKind::CskQuadrature: return "csk_quadrature";
    case IdentityKind::FUnique: return "f_unique";
  }
  return "unknown";
}

IdentityKind parse_identity_kind(std::string_view name) {
  for (auto kind : all_identity_kinds()) {
    if (to_string(kind) == name) return kind;
  }
  raise(ErrorKind::InvalidParameter, "unknown identity kind: " + std::string(name));
}

std::vector<IdentityKind> all_identity_kinds() {
  return {IdentityKind::Subordination, IdentityKind::Biane3, IdentityKind::Inversion, IdentityKind::CskQuadrature,
          IdentityKind::FUnique};
}

double identity_threshold(IdentityKind kind) {
  switch (kind) {
    case IdentityKind::Subordination: return 1e-10;
    case IdentityKind::Biane3: return 1e-6;
    case IdentityKind::Inversion: return 1e-4;
    case IdentityKind::CskQuadrature: return 1e-8;
    case IdentityKind::FUnique: return 1e-3;
  }
  return 0.0;
}

namespace {

struct Draw {
  double s, t, x;
  ComplexPoint z;
  double u;  // spare uniform
};

Draw draw_point(const SeedSpec& seed, std::size_t i) {
  UniformStream rng({seed.base_seed, seed.stream_index + i});
  Draw d{};
  d.t = 4.0 * (1.0 - rng());
  d.s = d.t * (0.01 + 0.98 * rng());
  d.x = 4.0 * (1.0 - rng());
  const double re = -10.0 + 12.0 * rng();
  const double im = 0.1 + 9.9 * rng();
  d.z = {re, im};
  d.u = rng();
  return d;
}

// Per-sample residuals, one entry per sub-check.
struct SampleResult {
  std::vector<double> residuals;
  std::string where;
};

constexpr double kAsymptoticY = 1e4;

SampleResult run_sample(IdentityKind kind, std::size_t i, const SeedSpec& seed) {
  Draw d = draw_point(seed, i);
  SampleResult r;
  std::ostringstream where;
  where.precision(10);
  switch (kind) {
    case IdentityKind::Subordination: {
      if (i == 0) d = {1.0, 2.0, 1.0, {-1.0, 0.0}, 0.0};
      const ComplexPoint lhs = g_half_closed(d.t, d.z);
      const ComplexPoint rhs = g_half_closed(d.s, subordinator_F(d.s, d.t, d.z));
      r.residuals = {std::abs(lhs - rhs)};
      where << "s=" << d.s << " t=" << d.t << " z=" << describe(d.z);
      break;
    }
    case IdentityKind::Biane3: {
      if (i == 0) d = {1.0, 2.0, 1.0, {-1.0, 0.0}, 0.0};
      const ComplexPoint closed = biane_H(d.s, d.t, d.x, d.z);
      const auto mu = biane_shifted_measure(d.s, d.t, d.x);
      ComplexPoint quad;
      if (d.z.imag() > 0.0) {
        quad = cauchy_stieltjes(mu, d.z, 1e-10);
      } else {
        // real z < 0 lies off the support; integrate directly
        QuadratureOptions opts;
        opts.abs_tol = 1e-10;
        opts.rel_tol = 1e-13;
        const double zr = d.z.real();
        quad = integrate_to_infinity([&](double y) { return mu.density(y) / (zr - y); }, 0.0, mu.scale, opts,
                                     mu.breaks)
                   .value;
      }
      r.residuals = {std::abs(closed - quad)};
      where << "s=" << d.s << " t=" << d.t << " x=" << d.x << " z=" << describe(d.z);
      break;
    }
    case IdentityKind::Inversion: {
      MeasureDensity mu;
      double y = 0.0;
      switch (i % 4) {
        case 0:
          mu = half_stable_measure(d.t);
          y = d.t * d.t * (0.3 + 2.0 * d.u);
          break;
        case 1:
          mu = biane_shifted_measure(d.s, d.t, d.x);
          y = 0.05 + 2.0 * d.x * d.u;
          break;
        case 2:
          mu = cauchy_measure(d.t);
          y = d.t * (4.0 * d.u - 2.0);
          break;
        default: {
          const double q = -0.9 + 1.8 * d.x / 4.0;
          mu = qnormal_measure(q);
          y = mu.support.hi * (1.8 * d.u - 0.9);
          break;
        }
      }
      const auto inv = stieltjes_invert([&](ComplexPoint z) { return cauchy_stieltjes(mu, z, 1e-12); }, y);
      r.residuals = {std::abs(inv.value - mu.density(y))};
      where << mu.label << " y=" << y;
      break;
    }
    case IdentityKind::CskQuadrature: {
      if (i == 0) d = {0.5, 1.0, 1.0, {0.0, 2.0}, 0.0};
      const ComplexPoint closed = g_half_closed(d.t, d.z);
      const ComplexPoint quad = cauchy_stieltjes(half_stable_measure(d.t), d.z, 1e-12);
      const ComplexPoint csk = g_half_csk(d.t, d.z);
      r.residuals = {std::max(std::abs(closed - quad), std::abs(closed - csk))};
      where << "t=" << d.t << " z=" << describe(d.z);
      break;
    }
    case IdentityKind::FUnique: {
      if (i == 0) d = {1.0, 2.0, 1.0, {-1.0, 1.0}, 0.0};
      const ComplexPoint iy{0.0, kAsymptoticY};
      const double asymptotic = std::abs(subordinator_F(d.s, d.t, iy) / iy - 1.0);
      const ComplexPoint f = subordinator_F(d.s, d.t, d.z);
      const double herglotz = std::max(0.0, (d.z.imag() - kSlitTol) - f.imag());
      const double conjugation = std::abs(subordinator_F(d.s, d.t, std::conj(d.z)) - std::conj(f));
      r.residuals = {asymptotic, herglotz, conjugation};
      where << "s=" << d.s << " t=" << d.t << " z=" << describe(d.z);
      break;
    }
  }
  r.where = where.str();
  return r;
}

}  // namespace

IdentityReport verify_identities(IdentityKind kind, int samples, SeedSpec seed, int threads) {
  if (samples < 1) raise(ErrorKind::InvalidParameter, "verify_identities needs at least one sample point");
  std::vector<SampleResult> results(static_cast<std::size_t>(samples));
  parallel_for(results.size(), threads, [&](std::size_t i, int) { results[i] = run_sample(kind, i, seed); });

  IdentityReport report;
  report.kind = kind;
  report.samples = samples;
  report.threshold = identity_threshold(kind);
  std::vector<std::string> names{std::string(to_string(kind))};
  std::vector<double> thresholds{report.threshold};
  if (kind == IdentityKind::FUnique) {
    names = {"asymptotic F(iy)/(iy) at y=1e4", "im F(z) >= im z - 1e-12", "F(conj z) = conj F(z)"};
    thresholds = {1e-3, 0.0, 1e-12};
  }
  for (std::size_t c = 0; c < names.size(); ++c) {
    IdentityCheck check{names[c], 0.0, thresholds[c], false};
    for (const auto& r : results) {
      const double v = r.residuals[c];
      if (!(v <= check.max_residual)) {
        check.max_residual = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
        if (c == 0) report.worst_point = r.where;
      }
    }
    check.pass = check.max_residual <= check.threshold;
    report.checks.push_back(check);
  }
  report.max_residual = report.checks.front().max_residual;
  report.pass = std::all_of(report.checks.begin(), report.checks.end(), [](const auto& c) { return c.pass; });
  return report;
}

}  // namespace qtangent
