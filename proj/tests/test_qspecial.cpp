#include "doctest.h"

#include <cmath>
#include <random>

#include "qtangent/qspecial.hpp"

using namespace qtangent;

namespace {

double partial_product(double a, double q, int terms) {
  double p = 1.0;
  double qk = 1.0;
  for (int k = 0; k < terms; ++k) {
    p *= 1.0 - a * qk;
    qk *= q;
  }
  return p;
}

double varq0_identity(double q, double d, double x, double y) {
  return std::exp(-2 * d) *
         (4 * std::sinh(d) * std::sinh(d) + (1 - q) * (x - y) * (x - y) + 2 * (1 - q) * x * y * (1 - std::cosh(d)));
}

struct Grid {
  std::mt19937_64 rng{20240521};
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
};

}  // namespace

TEST_CASE("QParams support endpoints") {
  const QParamsd p(0.5);
  CHECK(p.x_plus == doctest::Approx(2.0 / std::sqrt(0.5)));
  CHECK(p.x_minus == -p.x_plus);
  CHECK(QParamsd(0.6).x_plus > p.x_plus);
  CHECK_THROWS_AS(QParamsd(1.0), Error);
  CHECK_THROWS_AS(QParamsd(-1.0), Error);
}

TEST_CASE("q-Pochhammer product") {
  CHECK(q_pochhammer_inf(0.0, 0.5) == 1.0);
  CHECK(q_pochhammer_inf(0.5, 0.0) == 0.5);
  const double oracle = partial_product(0.5, 0.5, 61);
  CHECK(q_pochhammer_inf(0.5, 0.5) == doctest::Approx(oracle).epsilon(1e-14));
  // a = q^{-2} hits an exact zero factor
  CHECK(q_pochhammer_inf(4.0, 0.5) == 0.0);

  SUBCASE("errors") {
    try {
      q_pochhammer_inf(0.5, 1.0);
      FAIL("expected NonConvergent");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonConvergent);
    }
    try {
      q_pochhammer_inf(0.5, 0.9, TruncationPolicy{1e-14, 5});
      FAIL("expected TruncationExceeded");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::TruncationExceeded);
    }
  }

  SUBCASE("stable under doubling k_max and tightening rel_tol") {
    for (double q : {-0.9, -0.5, 0.3, 0.9, 0.95}) {
      for (double a : {-2.0, 0.3, 0.99}) {
        const double base = q_pochhammer_inf(a, q);
        CHECK(q_pochhammer_inf(a, q, TruncationPolicy{1e-14, 20000}) == base);
        const double tight = q_pochhammer_inf(a, q, TruncationPolicy{1e-16, 20000});
        CHECK(std::abs(tight - base) <= 1e-13 * std::abs(base));
      }
    }
  }

  SUBCASE("negative q matches brute force") {
    CHECK(q_factorial_inf(-0.7) == doctest::Approx(partial_product(-0.7, -0.7, 400)).epsilon(1e-13));
  }
}

TEST_CASE("phi_qk examples") {
  CHECK(phi_qk(0.5, 1100, 0.7, 1.2, -0.4) == 1.0);
  CHECK(phi_qk(0.0, 1, 1.0, 1.0, 1.0) == 1.0);
  const double want = varq0_identity(0.5, 0.3, 0.2, -0.1);
  CHECK(phi_qk(0.5, 0, 0.3, 0.2, -0.1) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("phi_qk identities and bounds on a randomized grid") {
  Grid g;
  for (int i = 0; i < 2000; ++i) {
    const double q = g.uniform(-0.95, 0.95);
    const double xp = 2.0 / std::sqrt(1.0 - q);
    const double d = std::exp(g.uniform(std::log(1e-3), std::log(5.0)));
    const double x = g.uniform(-xp, xp);
    const double y = g.uniform(-xp, xp);
    const int k = int(g.uniform(0, 12));

    const double phi0 = phi_qk(q, 0, d, x, y);
    const double identity = varq0_identity(q, d, x, y);
    // relative to the scale of the summands, since phi0 itself can be small
    const double scale = std::exp(-2 * d) * (4 * std::sinh(d) * std::sinh(d) + 8.0 / (1 - q) * (1 + std::cosh(d)));
    CHECK(std::abs(phi0 - identity) <= 1e-12 * scale);

    const double lower = std::exp(-2 * d) *
                         (16 * std::pow(std::sinh(d / 2), 4) + (1 - q) * (x - y) * (x - y));
    CHECK(phi0 >= lower - 1e-12);

    const double phik = phi_qk(q, k, d, x, y);
    CHECK(phik >= std::pow(1 - std::exp(-d) * std::pow(std::abs(q), k), 4) - 1e-12);
    CHECK(phik == doctest::Approx(phi_qk(q, k, d, y, x)).epsilon(1e-14));
  }
}

TEST_CASE("psi and star factors") {
  CHECK(psi_qk(0.0, 1, 3.7) == 1.0);
  CHECK(psi_qk(0.5, 1, 0.0) == 2.25);
  CHECK(psi_qk(0.5, 2, 1.0) == doctest::Approx(1.4375).epsilon(1e-15));

  CHECK(phi_star(0.0, 1, 1.0, 2.0, 0.3, -0.8) == 4.0);
  CHECK(psi_star(0.0, 1, 1.0, 2.0, 1.0) == 4.0);
  CHECK(phi_star(0.0, 0, 1.0, 2.0, 0.5, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("tail_product_ratio") {
  auto one = [](int) { return 1.0; };
  CHECK(tail_product_ratio(0.0, [](int k) { return psi_qk(0.0, k, 1.3); }, one) == 1.0);
  CHECK(tail_product_ratio(0.0, [](int k) { return psi_star(0.0, k, 0.5, 2.0, 1.0); },
                           [](int k) { return phi_star(0.0, k, 0.5, 2.0, 0.1, 1.0); }) == 1.0);

  auto same = [](int k) { return psi_qk(0.7, k, 0.4); };
  CHECK(tail_product_ratio(0.7, same, same) == 1.0);

  SUBCASE("matches a long brute-force product") {
    const double q = 0.8, x = 1.1;
    double brute = 1.0;
    for (int k = 1; k < 400; ++k) brute *= psi_qk(q, k, x);
    CHECK(tail_product_ratio(q, [&](int k) { return psi_qk(q, k, x); }, one) ==
          doctest::Approx(brute).epsilon(1e-13));
  }

  SUBCASE("survives partial products outside the double range") {
    auto num = [](int k) {
      switch (k) {
        case 1: return 1e200;
        case 2: return 1e200;
        case 3: return 1e-250;
        case 4: return 1e-149;
        default: return 1.0;
      }
    };
    CHECK(tail_product_ratio(0.5, num, one) == doctest::Approx(10.0).epsilon(1e-12));
  }

  SUBCASE("non-positive denominator") {
    try {
      tail_product_ratio(0.5, one, [](int k) { return k == 3 ? 0.0 : 1.0; });
      FAIL("expected DivergentTerm");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DivergentTerm);
    }
  }

  CHECK(truncation_index(0.0) == 1);
  CHECK(truncation_index(0.5) > 40);
}
