#pragma once

// Cauchy-Stieltjes transforms of the free 1/2-stable and Cauchy families,
// the subordination function of the 1/2-stable semigroup, and numerical
// Stieltjes inversion.

#include <complex>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "qtangent/kernels.hpp"
#include "qtangent/sampling.hpp"

namespace qtangent {

using ComplexPoint = std::complex<double>;

/// A probability density with enough shape information to integrate it:
/// `scale` is its natural width, `breaks` are points where it peaks or kinks,
/// and `sqrt_edges` marks square-root vanishing at finite support ends.
struct MeasureDensity {
  std::function<double(double)> density;
  Support support;
  std::string label;
  double scale = 1.0;
  std::vector<double> breaks;
  bool sqrt_edges = true;
};

MeasureDensity half_stable_measure(double t);
MeasureDensity cauchy_measure(double t);
MeasureDensity semicircle_measure(double radius);
MeasureDensity qnormal_measure(double q);
/// y -> p^(1/2)_{s,t}(x, y), the shifted Biane kernel on (0, inf).
MeasureDensity biane_shifted_measure(double s, double t, double x);

/// Total mass by quadrature.
double measure_mass(const MeasureDensity& mu);

/// G(z) = int mu(dx) / (z - x) for im z > 0.
ComplexPoint cauchy_stieltjes(const MeasureDensity& mu, ComplexPoint z, double abs_tol = 1e-11);

/// Closed forms for nu_t^(1/2): -4 / (sqrt(t^2 - 4z) + t)^2 and the
/// unsimplified (t sqrt(t^2 - 4z) - t^2 + 2z) / (2 z^2). BranchCut on the
/// slit [t^2/4, inf).
ComplexPoint g_half_closed(double t, ComplexPoint z);
ComplexPoint g_half_csk(double t, ComplexPoint z);

/// 1 / (z + i t).
ComplexPoint g_cauchy(double t, ComplexPoint z);

/// F(z) = (s^2 - (t - s + sqrt(t^2 - 4z))^2) / 4, so that G_t = G_s o F.
ComplexPoint subordinator_F(double s, double t, ComplexPoint z);

/// H(z) = 1 / (-x - (t - s + sqrt(-z))^2), the transform of y -> p^(1/2)_{s,t}(x, y).
ComplexPoint biane_H(double s, double t, double x, ComplexPoint z);

/// R-transform of the Cauchy family: the constant i t.
ComplexPoint r_transform_cauchy(double t, ComplexPoint z);
/// Compositional inverse of g_cauchy: 1/w - i t.
ComplexPoint k_cauchy(double t, ComplexPoint w);

/// True when z lies within 1e-12 of the real half-line [a, inf).
bool on_slit(ComplexPoint z, double a);

using Transform = std::function<ComplexPoint(ComplexPoint)>;

struct InversionRung {
  double eps;
  double raw;           // -Im T(y + i eps) / pi
  double extrapolated;  // linear-in-eps extrapolation through this rung and the previous one; NaN on the first
};

struct InversionResult {
  double value;
  std::vector<InversionRung> ladder;
};

/// Density at y recovered from -Im T(y + i eps) / pi over a decreasing eps
/// ladder. Throws NonConvergentLadder when successive raw differences grow.
InversionResult stieltjes_invert(const Transform& transform, double y,
                                 const std::vector<double>& eps_ladder = {1e-2, 1e-3, 1e-4});

enum class IdentityKind { Subordination, Biane3, Inversion, CskQuadrature, FUnique };

std::string_view to_string(IdentityKind kind);
IdentityKind parse_identity_kind(std::string_view name);
std::vector<IdentityKind> all_identity_kinds();

struct IdentityCheck {
  std::string name;
  double max_residual = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct IdentityReport {
  IdentityKind kind;
  int samples = 0;
  double max_residual = 0.0;  // of the primary check
  double threshold = 0.0;
  bool pass = false;          // all checks
  std::string worst_point;
  std::vector<IdentityCheck> checks;
};

double identity_threshold(IdentityKind kind);

/// Residual sweep over `samples` random points (sample 0 is a fixed reference
/// point per kind). z is drawn from re in [-10, 2], im in [0.1, 10]; times
/// from 0 < s < t <= 4. Sample i uses stream seed.stream_index + i.
IdentityReport verify_identities(IdentityKind kind, int samples, SeedSpec seed, int threads = 0);

}  // namespace qtangent
