#pragma once

// Finite-eps rescaled transition densities of q-OU / q-BM near a point,
// their tangent-process limits, and eps-ladder convergence studies.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qtangent/kernels.hpp"

namespace qtangent {

enum class CaseTag { QouInterior, QouBoundary, QbmInterior, QbmBoundary };

std::string_view to_string(CaseTag tag);
CaseTag parse_case(std::string_view name);

struct TangentCase {
  CaseTag tag = CaseTag::QouInterior;
  double q = 0.0;
  double s = 1.0;
  double x = 0.0;
  // replaces the Cauchy scale c of the interior limits (negative controls)
  std::optional<double> scale_override;

  static TangentCase qou_interior(double q, double x);
  static TangentCase qou_boundary(double q);
  static TangentCase qbm_interior(double q, double s, double x);
  static TangentCase qbm_boundary(double q, double s);

  bool is_boundary() const { return tag == CaseTag::QouBoundary || tag == CaseTag::QbmBoundary; }
  void validate() const;
};

/// c_{q,x} = sqrt(4/(1-q) - x^2).
double c_qx(double q, double x);
/// c_{q,s,x} = sqrt(4s/(1-q) - x^2) / (2s).
double c_qsx(double q, double s, double x);

/// Density of the rescaled increment process between times t1 < t2 (in
/// rescaled units) evaluated from the exact kernels. Throws OutOfSupport when
/// a shifted state leaves the state space.
double rescaled_pdf(const TangentCase& c, double eps, double t1, double t2, double y1, double y2);

/// Closed-form tangent-limit transition density.
double limit_pdf(const TangentCase& c, double t1, double t2, double y1, double y2);

/// Open interval of y2 for which the eps-shifted end state is inside the support.
Support rescaled_support(const TangentCase& c, double eps, double t2);

struct TangentWindow {
  double t1 = 0.0;
  double t2 = 1.0;
  double y1 = 0.0;
  double y_lo = 0.0;
  double y_hi = 0.0;
};

/// Window in y2 holding `coverage` of the limit mass (default 99%).
TangentWindow default_window(const TangentCase& c, double t1 = 0.0, double t2 = 1.0, double y1 = 0.0,
                             double coverage = 0.99);

struct DistanceResult {
  double l1 = 0.0;
  double sup = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool shrunk = false;
  // limit mass outside the evaluated window
  double tail_remainder = 0.0;
};

/// Grid for window comparisons: y = center + gamma tan(u) (Cauchy-like) or
/// y = lo + gamma tan(u)^2 (half-line with a square-root edge at lo).
struct WindowMap {
  bool cauchy = true;
  double center = 0.0;
  double gamma = 1.0;
};

/// L1 and sup distance of f and g on [lo, hi] by the trapezoid rule in the
/// mapped variable; tail_remainder is 1 - integral of g over the window.
DistanceResult compare_on_window(const std::function<double(double)>& f, const std::function<double(double)>& g,
                                 double lo, double hi, const WindowMap& map, int resolution = 4001);

DistanceResult distance(const TangentCase& c, double eps, const TangentWindow& window, int resolution = 4001);

struct LadderRung {
  double eps = 0.0;
  DistanceResult distance;
};

struct ConvergenceReport {
  TangentCase tangent_case;
  TangentWindow window;
  std::vector<LadderRung> ladder;
  double threshold = 0.02;
  double slack = 0.10;
  int resolution = 4001;
  bool monotone = false;
  bool terminal_ok = false;
  bool verdict = false;
};

struct StudyOptions {
  double threshold = 0.02;
  double slack = 0.10;
  int resolution = 4001;
};

ConvergenceReport convergence_study(const TangentCase& c, const std::vector<double>& ladder,
                                    const std::optional<TangentWindow>& window = std::nullopt,
                                    const StudyOptions& options = {});

/// E(|Y_t2 - Y_t1|^2 ^ 1 | Y_t1 = y1) / (t2 - t1) for the interior q-OU
/// rescaled process at x.
double aldous_ratio(double q, double eps, double x, double y1, double t1, double t2);

}  // namespace qtangent
