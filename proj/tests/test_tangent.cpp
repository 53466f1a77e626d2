#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qtangent/tangent.hpp"

using namespace qtangent;

namespace {

constexpr double kPi = std::numbers::pi;
const std::vector<double> kLadder{0.2, 0.1, 0.05, 0.02, 0.01};

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidParameter;
}

}  // namespace

TEST_CASE("rescaled densities near their limits") {
  const auto oi = TangentCase::qou_interior(0.0, 0.0);
  CHECK(rescaled_pdf(oi, 1e-3, 0, 1, 0, 0) == doctest::Approx(1 / (2 * kPi)).epsilon(0.02));
  const auto ob = TangentCase::qou_boundary(0.0);
  CHECK(rescaled_pdf(ob, 1e-2, 0, 1, 0, 1) == doctest::Approx(1 / (2 * kPi)).epsilon(0.03));

  for (const auto& c : {oi, ob, TangentCase::qbm_interior(0.5, 1.0, 0.3), TangentCase::qbm_boundary(0.5, 2.0)}) {
    const Support sup = rescaled_support(c, 0.05, 1.0);
    CHECK(rescaled_pdf(c, 0.05, 0, 1, 0, sup.hi) == 0.0);
    CHECK(kind_of([&] { rescaled_pdf(c, 0.05, 0, 1, 0, sup.hi * 1.01 + 1.0); }) == ErrorKind::OutOfSupport);
  }
  CHECK(kind_of([&] { rescaled_pdf(ob, 0.1, 0, 1, -5.0, 1.0); }) == ErrorKind::OutOfSupport);
  CHECK(kind_of([&] { rescaled_pdf(oi, 0.1, 1, 1, 0, 0); }) == ErrorKind::InvalidTime);
}

TEST_CASE("limit densities") {
  CHECK(limit_pdf(TangentCase::qou_interior(0.0, 0.0), 0, 1, 0, 0) == doctest::Approx(1 / (2 * kPi)).epsilon(1e-14));
  CHECK(limit_pdf(TangentCase::qou_boundary(0.0), 0, 1, 0, 1) == doctest::Approx(1 / (2 * kPi)).epsilon(1e-14));

  for (double s : {0.5, 1.0, 2.0}) {
    for (double x : {-0.8, 0.0, 1.1}) {
      const auto c = TangentCase::qbm_interior(0.5, s, x);
      double best = -1.0, arg = 0.0;
      const double step = 1e-4;
      for (int i = -40000; i <= 40000; ++i) {
        const double y = i * step;
        const double v = limit_pdf(c, 0, 1, 0, y);
        if (v > best) best = v, arg = y;
      }
      CHECK(std::abs(arg - x / (2 * s)) <= step);
    }
  }
}

TEST_CASE("limit identities") {
  for (double q : {-0.5, 0.0, 0.5, 0.9}) {
    const double xp = QParamsd(q).x_plus;
    for (double x : {0.0, 0.3 * xp, -0.7 * xp}) {
      const auto c = TangentCase::qou_interior(q, x);
      const double k = c_qx(q, x);
      for (double y2 : {-3.0, 0.0, 0.4, 17.0}) {
        CHECK(limit_pdf(c, 0.2, 1.5, 0.7, y2) ==
              doctest::Approx(cauchy_transition_pdf(0.2, 1.5, 0.7 / k, y2 / k) / k).epsilon(1e-12));
      }
      CHECK(c_qx(q, 0.999 * xp) < 0.05 * c_qx(q, 0.0));
    }
    for (double s : {0.5, 2.0}) {
      const double x = 0.4 * 2 * std::sqrt(s / (1 - q));
      auto drifted = TangentCase::qbm_interior(q, s, x);
      auto driftless = TangentCase::qbm_interior(q, s, x);
      driftless.scale_override = c_qsx(q, s, x);
      const double d = x / (2 * s);
      const double k = c_qsx(q, s, x);
      for (double h : {-1.0, 0.0, 2.5}) {
        const double t1 = 0.3, t2 = 1.1;
        const double lhs = limit_pdf(drifted, t1, t2, t1 * d + h, t2 * d + h + 0.2);
        const double rhs = cauchy_transition_pdf(k * t1, k * t2, h, h + 0.2);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
      }
    }
    const auto ob = TangentCase::qou_boundary(q);
    CHECK(limit_pdf(ob, 0, 1, 0, 0.0) == 0.0);
    CHECK(limit_pdf(ob, 0, 1, 0, -2.0) == 0.0);
    CHECK(limit_pdf(ob, 0, 1, 0, 0.5) > 0.0);
  }
}

TEST_CASE("distances") {
  auto f = [](double y) { return cauchy_marginal(1.0, y); };
  const auto same = compare_on_window(f, f, -50.0, 50.0, {true, 0.0, 1.0});
  CHECK(same.l1 == 0.0);
  CHECK(same.sup == 0.0);

  const auto c = TangentCase::qou_interior(0.5, 0.0);
  const auto w = default_window(c);
  CHECK(distance(c, 1e-3, w).l1 < distance(c, 1e-1, w).l1);

  for (const auto& tc : {c, TangentCase::qou_boundary(0.5), TangentCase::qbm_interior(0.0, 1.0, 0.5),
                         TangentCase::qbm_boundary(0.9, 1.0)}) {
    const auto win = default_window(tc);
    auto limit = [&](double y) { return limit_pdf(tc, 0, 1, 0, y); };
    const auto shape = tc.is_boundary() ? WindowMap{false, win.y_lo, 1.0} : WindowMap{true, 0.5 * (win.y_lo + win.y_hi), 1.0};
    const auto self = compare_on_window(limit, limit, win.y_lo, win.y_hi, shape, 20001);
    CHECK(self.tail_remainder <= 0.01 + 1e-6);
    CHECK(self.tail_remainder >= 0.0);
  }
}

TEST_CASE("convergence studies") {
  auto study = convergence_study(TangentCase::qou_interior(0.5, 0.5), kLadder);
  CHECK(study.monotone);
  CHECK(study.ladder.size() == kLadder.size());
  // terminal L1 here is ~0.035; the default 0.02 cut is too tight for q = 0.5
  StudyOptions relaxed;
  relaxed.threshold = 0.05;
  CHECK(convergence_study(TangentCase::qou_interior(0.5, 0.5), kLadder, std::nullopt, relaxed).verdict);

  auto wrong = TangentCase::qou_interior(0.5, 0.0);
  wrong.scale_override = 1.0;
  CHECK_FALSE(convergence_study(wrong, kLadder).verdict);

  CHECK(convergence_study(TangentCase::qbm_boundary(0.0, 1.0), kLadder).verdict);

  CHECK(kind_of([] { convergence_study(TangentCase::qou_interior(0.0, 0.0), {0.1, 0.2}); }) ==
        ErrorKind::InvalidParameter);
}

TEST_CASE("case validation") {
  CHECK(kind_of([] { TangentCase::qou_interior(0.0, 2.0).validate(); }) == ErrorKind::InvalidState);
  auto shifted = TangentCase::qou_boundary(0.0);
  shifted.x += 1e-3;
  CHECK(kind_of([&] { shifted.validate(); }) == ErrorKind::InvalidState);
  CHECK(kind_of([] { TangentCase::qbm_interior(0.0, 0.0, 0.0).validate(); }) == ErrorKind::InvalidTime);
  CHECK(parse_case("qbm_boundary") == CaseTag::QbmBoundary);
  CHECK(kind_of([] { parse_case("qou_middle"); }) == ErrorKind::UnknownProcess);
}

TEST_CASE("Aldous ratio diagnostic") {
  CHECK(kind_of([] { aldous_ratio(0.0, 0.01, 0.0, 0.0, 1.0, 1.0); }) == ErrorKind::InvalidTime);
  const double a = aldous_ratio(0.0, 0.01, 0.0, 0.0, 0.0, 0.1);
  const double b = aldous_ratio(0.0, 0.01, 0.0, 0.0, 0.0, 1.0);
  CHECK(std::isfinite(a));
  CHECK(std::isfinite(b));
  CHECK(std::max(a, b) / std::min(a, b) < 10.0);
  double lo = 1e300, hi = 0.0;
  for (double dt : {0.2, 0.5, 1.0, 2.0}) {
    const double r = aldous_ratio(0.5, 1e-3, 0.4, 0.0, 0.0, dt);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  CHECK(hi / lo < 10.0);
}
