#include "doctest.h"

#include <cmath>
#include <numbers>

#include "qtangent/freeprob.hpp"

using namespace qtangent;

namespace {

constexpr double kPi = std::numbers::pi;
const ComplexPoint kI{0.0, 1.0};

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidParameter;
}

double dist(ComplexPoint a, ComplexPoint b) { return std::abs(a - b); }

}  // namespace

TEST_CASE("measures are normalized") {
  for (double t : {0.2, 1.0, 3.5}) {
    CHECK(std::abs(measure_mass(half_stable_measure(t)) - 1.0) <= 1e-7);
    CHECK(std::abs(measure_mass(cauchy_measure(t)) - 1.0) <= 1e-7);
  }
  CHECK(std::abs(measure_mass(semicircle_measure(0.01)) - 1.0) <= 1e-7);
  for (double q : {-0.8, 0.0, 0.6}) CHECK(std::abs(measure_mass(qnormal_measure(q)) - 1.0) <= 1e-7);
  CHECK(std::abs(measure_mass(biane_shifted_measure(1.0, 2.0, 1.0)) - 1.0) <= 1e-7);
  CHECK(std::abs(measure_mass(biane_shifted_measure(0.5, 0.6, 3.0)) - 1.0) <= 1e-7);
  // support of nu_t^(1/2) starts at t^2/4 exactly
  CHECK(half_stable_measure(1.4).support.lo == 1.4 * 1.4 / 4.0);
}

TEST_CASE("cauchy_stieltjes examples") {
  CHECK(dist(cauchy_stieltjes(semicircle_measure(1e-3), kI), -kI) <= 1e-6);
  CHECK(dist(cauchy_stieltjes(cauchy_measure(1.0), 2.0 * kI), -kI / 3.0) <= 1e-9);
  CHECK(dist(cauchy_stieltjes(half_stable_measure(1.0), kI), g_half_closed(1.0, kI)) <= 1e-8);
  // close to the real axis
  const ComplexPoint near{0.7, 0.01};
  CHECK(dist(cauchy_stieltjes(half_stable_measure(1.0), near), g_half_closed(1.0, near)) <= 1e-9);
  CHECK(dist(cauchy_stieltjes(cauchy_measure(2.0), near), g_cauchy(2.0, near)) <= 1e-9);
  CHECK(kind_of([] { cauchy_stieltjes(cauchy_measure(1.0), {0.0, 0.0}); }) == ErrorKind::InvalidParameter);
}

TEST_CASE("Herglotz property") {
  const auto mu = qnormal_measure(0.5);
  for (double re : {-3.0, 0.0, 1.5}) {
    for (double im : {0.01, 0.5, 20.0}) {
      CHECK(cauchy_stieltjes(mu, {re, im}).imag() < 0.0);
      CHECK(cauchy_stieltjes(half_stable_measure(0.8), {re, im}).imag() < 0.0);
    }
  }
}

TEST_CASE("closed transform of the half-stable law") {
  CHECK(g_half_closed(1.0, -1.0).real() == doctest::Approx((std::sqrt(5.0) - 3.0) / 2.0).epsilon(1e-14));
  CHECK(g_half_csk(1.0, -1.0).real() == doctest::Approx((std::sqrt(5.0) - 3.0) / 2.0).epsilon(1e-14));
  CHECK(g_half_closed(2.0, -1.0).real() == doctest::Approx(-(3.0 - 2.0 * std::sqrt(2.0))).epsilon(1e-14));
  const ComplexPoint far = 1e8 * kI;
  CHECK(std::abs(far * g_half_closed(1.0, far) - 1.0) <= 1e-3);
  for (ComplexPoint z : {ComplexPoint{0.3, 0.2}, ComplexPoint{-4, 1}, ComplexPoint{5, 0.1}}) {
    CHECK(dist(g_half_closed(1.5, z), g_half_csk(1.5, z)) <= 1e-12);
  }
  CHECK(kind_of([] { g_half_closed(1.0, 0.25); }) == ErrorKind::BranchCut);
  CHECK(kind_of([] { g_half_closed(1.0, {3.0, 1e-13}); }) == ErrorKind::BranchCut);
  CHECK(kind_of([] { g_half_csk(1.0, 0.0); }) == ErrorKind::InvalidParameter);
  // just left of the branch point is allowed
  CHECK(std::isfinite(g_half_closed(1.0, 0.25 - 1e-9).real()));
}

TEST_CASE("subordination function") {
  CHECK(subordinator_F(1.0, 2.0, -1.0).real() == doctest::Approx(-2.0 - std::sqrt(2.0)).epsilon(1e-14));
  const ComplexPoint z{0.4, 0.7};
  CHECK(dist(subordinator_F(1.0, 1.0 + 1e-12, z), z) <= 1e-6);
  CHECK(g_half_closed(1.0, subordinator_F(1.0, 2.0, -1.0)).real() ==
        doctest::Approx(-0.1715728753).epsilon(1e-9));
  CHECK(dist(g_half_closed(2.0, -1.0), g_half_closed(1.0, subordinator_F(1.0, 2.0, -1.0))) <= 1e-12);
  CHECK(subordinator_F(0.5, 3.0, z).imag() >= z.imag());
  CHECK(kind_of([] { subordinator_F(2.0, 2.0, kI); }) == ErrorKind::InvalidTime);
  CHECK(kind_of([] { subordinator_F(3.0, 2.0, kI); }) == ErrorKind::InvalidTime);
  CHECK(kind_of([] { subordinator_F(1.0, 2.0, 5.0); }) == ErrorKind::BranchCut);
}

TEST_CASE("F-unique asymptotics at y = 1e4") {
  const ComplexPoint iy{0.0, 1e4};
  const double deviation = std::abs(subordinator_F(1.0, 2.0, iy) / iy - 1.0);
  CHECK(deviation <= 1e-3);
  // the deviation decays like (t - s) / sqrt(y)
  const ComplexPoint far{0.0, 1e8};
  CHECK(std::abs(subordinator_F(1.0, 2.0, far) / far - 1.0) <= 1e-3);
  CHECK(deviation == doctest::Approx(1.0 / std::sqrt(1e4)).epsilon(0.02));
}

TEST_CASE("Biane transform") {
  CHECK(biane_H(1.0, 2.0, 1.0, -1.0).real() == doctest::Approx(-0.2).epsilon(1e-14));
  const auto report = verify_identities(IdentityKind::Biane3, 1, {});
  CHECK(report.max_residual <= 1e-6);
  const ComplexPoint far = 1e10 * kI;
  CHECK(std::abs(far * biane_H(1.0, 2.0, 1.0, far) - 1.0) <= 1e-4);
  CHECK(kind_of([] { biane_H(1.0, 2.0, 1.0, 2.0); }) == ErrorKind::BranchCut);
  CHECK(kind_of([] { biane_H(1.0, 2.0, 0.0, kI); }) == ErrorKind::InvalidState);
}

TEST_CASE("Stieltjes inversion") {
  auto r = stieltjes_invert([](ComplexPoint z) { return g_cauchy(1.0, z); }, 0.0);
  CHECK(r.value == doctest::Approx(1 / kPi).epsilon(1e-6));
  CHECK(r.ladder.size() == 3);
  CHECK(std::isnan(r.ladder[0].extrapolated));
  r = stieltjes_invert([](ComplexPoint z) { return g_half_closed(1.0, z); }, 1.0);
  CHECK(std::abs(r.value - std::sqrt(3.0) / (2 * kPi)) <= 1e-6);
  r = stieltjes_invert([](ComplexPoint z) { return biane_H(1.0, 2.0, 1.0, z); }, 1.0);
  CHECK(std::abs(r.value - 2.0 / (5.0 * kPi)) <= 1e-6);
  // of a quadrature transform
  const auto mu = qnormal_measure(0.3);
  r = stieltjes_invert([&](ComplexPoint z) { return cauchy_stieltjes(mu, z, 1e-12); }, 0.4);
  CHECK(std::abs(r.value - mu.density(0.4)) <= 1e-4);

  CHECK(kind_of([] { stieltjes_invert([](ComplexPoint z) { return g_cauchy(1.0, z); }, 0.0, {1e-3, 1e-2}); }) ==
        ErrorKind::InvalidParameter);
  // raw values that oscillate with growing amplitude
  auto wild = [](ComplexPoint z) { return ComplexPoint{0.0, std::sin(1.0 / z.imag()) / z.imag()}; };
  CHECK(kind_of([&] { stieltjes_invert(wild, 0.0); }) == ErrorKind::NonConvergentLadder);
}

TEST_CASE("Cauchy R-transform") {
  CHECK(r_transform_cauchy(1.0, {0.3, 2.0}) == kI);
  CHECK(r_transform_cauchy(0.7, kI) + r_transform_cauchy(1.6, kI) == r_transform_cauchy(2.3, kI));
  for (ComplexPoint w : {ComplexPoint{0.0, 0.1}, ComplexPoint{0.2, -0.3}}) {
    CHECK(dist(g_cauchy(1.0, k_cauchy(1.0, w)), w) <= 1e-14);
    // K(w) - 1/w equals minus the printed constant
    CHECK(dist(k_cauchy(1.0, w) - 1.0 / w, -r_transform_cauchy(1.0, w)) <= 1e-14);
  }
  CHECK(kind_of([] { r_transform_cauchy(0.0, kI); }) == ErrorKind::InvalidTime);
}

TEST_CASE("identity sweeps") {
  const SeedSpec seed{20240601, 0};
  auto sub = verify_identities(IdentityKind::Subordination, 1000, seed);
  CHECK(sub.max_residual <= 1e-10);
  CHECK(sub.pass);
  CHECK(verify_identities(IdentityKind::Subordination, 1, seed).max_residual <= 1e-12);

  auto csk = verify_identities(IdentityKind::CskQuadrature, 1, seed);
  CHECK(csk.max_residual <= 1e-8);
  CHECK(verify_identities(IdentityKind::CskQuadrature, 200, seed).pass);
  CHECK(verify_identities(IdentityKind::Biane3, 200, seed).pass);
  CHECK(verify_identities(IdentityKind::Inversion, 40, seed).pass);

  auto fu = verify_identities(IdentityKind::FUnique, 1000, seed);
  REQUIRE(fu.checks.size() == 3);
  CHECK(fu.checks[1].pass);
  CHECK(fu.checks[2].pass);
  CHECK(fu.checks[0].pass);

  // independent of the worker count
  auto a = verify_identities(IdentityKind::Inversion, 12, seed, 1);
  auto b = verify_identities(IdentityKind::Inversion, 12, seed, 3);
  CHECK(a.max_residual == b.max_residual);
  CHECK(parse_identity_kind("f_unique") == IdentityKind::FUnique);
  CHECK(kind_of([] { parse_identity_kind("nope"); }) == ErrorKind::InvalidParameter);
}
