#pragma once

// Closed-form densities: the q-normal law, the q-OU and q-BM transition
// kernels, the Cauchy and 1/2-stable Biane kernels, and the free 1-stable and
// 1/2-stable marginal semigroups.

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "qtangent/errors.hpp"
#include "qtangent/qspecial.hpp"

namespace qtangent {

enum class Process {
  QNormal,
  QOU,
  QBM,
  Cauchy,
  BianeHalf,
  BianeShifted,
  HalfStableMarginal,
  CauchyMarginal,
};

std::string_view to_string(Process process);
Process parse_process(std::string_view name);

struct Support {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  double width() const { return hi - lo; }
};

/// Support of the state at time t. q is ignored by the free processes, t by
/// the stationary ones.
Support support_of(Process process, double q, double t);

namespace detail {

// Square-root arguments within this distance below zero are rounding noise at
// a support boundary and are clamped.
inline constexpr double kBoundaryClamp = 1e-12;

template <typename Scalar>
Scalar sqrt_clamped(Scalar v) {
  return v > Scalar(0) ? std::sqrt(v) : Scalar(0);
}

/// 4 - u v for |u|, |v| <= 2, evaluated around the nearer endpoint so that the
/// result keeps relative accuracy when u, v approach the same boundary.
template <typename Scalar>
Scalar four_minus_product(Scalar u, Scalar v) {
  Scalar a, b;
  if (u + v < Scalar(0)) {
    a = Scalar(2) + u;
    b = Scalar(2) + v;
  } else {
    a = Scalar(2) - u;
    b = Scalar(2) - v;
  }
  return Scalar(2) * a + Scalar(2) * b - a * b;
}

/// phi_{q,0}(delta, x, y) rearranged into a sum of nonnegative terms:
/// e^{-2d}[16 sinh^4(d/2) + 4 sinh^2(d/2)(4 - (1-q)xy) + (1-q)(x-y)^2].
template <typename Scalar>
Scalar phi0_nonneg(Scalar q, Scalar delta, Scalar x, Scalar y) {
  const Scalar r = std::sqrt(Scalar(1) - q);
  const Scalar sh = std::sinh(delta / Scalar(2));
  const Scalar sh2 = sh * sh;
  const Scalar dxy = x - y;
  return std::exp(Scalar(-2) * delta) *
         (Scalar(16) * sh2 * sh2 + Scalar(4) * sh2 * four_minus_product(r * x, r * y) +
          (Scalar(1) - q) * dxy * dxy);
}

/// phi*_{q,0} = (t2-t1)^2 + (1-q)(y2-y1)(t1(y2-y1) - (t2-t1) y1).
template <typename Scalar>
Scalar phi_star0_stable(Scalar q, Scalar t1, Scalar t2, Scalar y1, Scalar y2) {
  const Scalar dt = t2 - t1;
  const Scalar dy = y2 - y1;
  return dt * dt + (Scalar(1) - q) * dy * (t1 * dy - dt * y1);
}

/// 4 bound^2 - (1-q) y^2 factored as (2 bound - r y)(2 bound + r y) with r = sqrt(1-q).
template <typename Scalar>
Scalar boundary_gap(Scalar q, Scalar bound_root, Scalar y) {
  const Scalar ry = std::sqrt(Scalar(1) - q) * y;
  Scalar g = (Scalar(2) * bound_root - ry) * (Scalar(2) * bound_root + ry);
  if (g < Scalar(0) && g > -Scalar(kBoundaryClamp)) g = Scalar(0);
  return g;
}

template <typename Scalar>
void require_interval(Scalar t1, Scalar t2) {
  if (!(t1 >= Scalar(0)) || !(t2 > t1)) {
    raise(ErrorKind::InvalidTime, "need 0 <= t1 < t2, got t1=" + std::to_string(double(t1)) +
                                      " t2=" + std::to_string(double(t2)));
  }
}

}  // namespace detail

/// q-normal (q-Gaussian) density; exactly 0 for |x| >= x_plus.
template <typename Scalar>
Scalar qnormal_pdf(const QParams<Scalar>& p, Scalar x, const TruncationPolicy& policy = {}) {
  if (!(std::abs(x) < p.x_plus)) return Scalar(0);
  const Scalar q = p.q;
  const Scalar gap = detail::boundary_gap(q, Scalar(1), x);
  const Scalar prefactor =
      std::sqrt(Scalar(1) - q) * q_factorial_inf(q, policy) / (Scalar(2) * std::numbers::pi_v<Scalar>);
  const Scalar tail = tail_product_ratio(
      q, [&](int k) { return psi_qk(q, k, x); }, [](int) { return Scalar(1); }, policy);
  return prefactor * detail::sqrt_clamped(gap) * tail;
}

/// Stationary q-OU transition density p_delta(x, y).
template <typename Scalar>
Scalar qou_transition_pdf(const QParams<Scalar>& p, Scalar delta, Scalar x, Scalar y,
                          const TruncationPolicy& policy = {}) {
  if (!(delta > Scalar(0))) {
    raise(ErrorKind::InvalidTime, "q-OU kernel needs delta > 0, got " + std::to_string(double(delta)));
  }
  if (!(std::abs(x) <= p.x_plus * (Scalar(1) + Scalar(detail::kBoundaryClamp)))) {
    raise(ErrorKind::InvalidState, "q-OU start state outside support: " + std::to_string(double(x)));
  }
  if (!(std::abs(y) < p.x_plus)) return Scalar(0);
  const Scalar q = p.q;
  const Scalar e2 = std::exp(Scalar(-2) * delta);
  // (e^{-2d}; q)_inf split as (1 - e^{-2d}) (e^{-2d} q; q)_inf for small-delta accuracy.
  const Scalar lead = -std::expm1(Scalar(-2) * delta) * q_pochhammer_inf(e2 * q, q, policy);
  const Scalar phi0 = detail::phi0_nonneg(q, delta, x, y);
  const Scalar tail = tail_product_ratio(
      q, [&](int k) { return psi_qk(q, k, y); }, [&](int k) { return phi_qk(q, k, delta, x, y); },
      policy);
  const Scalar marginal_prefactor =
      std::sqrt(Scalar(1) - q) * q_factorial_inf(q, policy) / (Scalar(2) * std::numbers::pi_v<Scalar>);
  const Scalar gap = detail::boundary_gap(q, Scalar(1), y);
  return lead * marginal_prefactor * detail::sqrt_clamped(gap) / phi0 * tail;
}

/// q-Brownian motion transition density kappa_{t1,t2}(y1, y2). The start
/// t1 = 0, y1 = 0 is allowed.
template <typename Scalar>
Scalar qbm_transition_pdf(const QParams<Scalar>& p, Scalar t1, Scalar t2, Scalar y1, Scalar y2,
                          const TruncationPolicy& policy = {}) {
  detail::require_interval(t1, t2);
  const Scalar q = p.q;
  const Scalar one_minus_q = Scalar(1) - q;
  const Scalar bound1 = Scalar(2) * std::sqrt(t1 / one_minus_q);
  if (!(std::abs(y1) <= bound1 * (Scalar(1) + Scalar(detail::kBoundaryClamp)) +
                            Scalar(std::numeric_limits<double>::min()))) {
    raise(ErrorKind::InvalidState, "q-BM start state outside support: " + std::to_string(double(y1)));
  }
  const Scalar bound2 = Scalar(2) * std::sqrt(t2 / one_minus_q);
  if (!(std::abs(y2) < bound2)) return Scalar(0);
  const Scalar gap = detail::boundary_gap(q, std::sqrt(t2), y2);
  const Scalar phi0 = detail::phi_star0_stable(q, t1, t2, y1, y2);
  const Scalar tail = tail_product_ratio(
      q, [&](int k) { return psi_star(q, k, t1, t2, y2); },
      [&](int k) { return phi_star(q, k, t1, t2, y1, y2); }, policy);
  const Scalar prefactor =
      one_minus_q * std::sqrt(one_minus_q) * (t2 - t1) / (Scalar(2) * std::numbers::pi_v<Scalar>);
  return prefactor * detail::sqrt_clamped(gap) / phi0 * tail;
}

/// Cauchy process transition density f^(1).
template <typename Scalar>
Scalar cauchy_transition_pdf(Scalar t1, Scalar t2, Scalar y1, Scalar y2) {
  detail::require_interval(t1, t2);
  const Scalar dt = t2 - t1;
  const Scalar dy = y2 - y1;
  return dt / (std::numbers::pi_v<Scalar> * (dy * dy + dt * dt));
}

/// 1/2-stable Biane transition density f^(1/2); 0 for y2 <= t2^2 / 4.
template <typename Scalar>
Scalar biane_half_pdf(Scalar t1, Scalar t2, Scalar y1, Scalar y2) {
  detail::require_interval(t1, t2);
  if (y1 < t1 * t1 / Scalar(4) - Scalar(detail::kBoundaryClamp)) {
    raise(ErrorKind::InvalidState, "Biane start state below t1^2/4: " + std::to_string(double(y1)));
  }
  const Scalar gap = Scalar(4) * y2 - t2 * t2;
  if (!(gap > Scalar(0))) return Scalar(0);
  const Scalar dt = t2 - t1;
  const Scalar dy = y2 - y1;
  const Scalar den = dy * dy - dt * t1 * dy + dt * dt * y1;
  return dt * std::sqrt(gap) / (Scalar(2) * std::numbers::pi_v<Scalar> * den);
}

/// Time-homogeneous kernel of Z^(1/2)_{2t} - t^2; 0 for y2 <= 0.
template <typename Scalar>
Scalar biane_shifted_pdf(Scalar t1, Scalar t2, Scalar y1, Scalar y2) {
  detail::require_interval(t1, t2);
  if (y1 < Scalar(0)) {
    raise(ErrorKind::InvalidState, "shifted Biane start state must be >= 0: " + std::to_string(double(y1)));
  }
  if (!(y2 > Scalar(0))) return Scalar(0);
  const Scalar dt = t2 - t1;
  const Scalar dt2 = dt * dt;
  const Scalar dy = y2 - y1;
  return Scalar(2) * dt * std::sqrt(y2) /
         (std::numbers::pi_v<Scalar> * (dy * dy + Scalar(2) * (y1 + y2) * dt2 + dt2 * dt2));
}

/// Free 1/2-stable marginal nu_t^(1/2) on (t^2/4, inf).
template <typename Scalar>
Scalar half_stable_marginal(Scalar t, Scalar x) {
  if (!(t > Scalar(0))) raise(ErrorKind::InvalidTime, "marginal needs t > 0");
  const Scalar gap = Scalar(4) * x - t * t;
  if (!(gap > Scalar(0))) return Scalar(0);
  return t * std::sqrt(gap) / (Scalar(2) * std::numbers::pi_v<Scalar> * x * x);
}

/// Free 1-stable (Cauchy) marginal nu_t^(1).
template <typename Scalar>
Scalar cauchy_marginal(Scalar t, Scalar x) {
  if (!(t > Scalar(0))) raise(ErrorKind::InvalidTime, "marginal needs t > 0");
  return t / (std::numbers::pi_v<Scalar> * (x * x + t * t));
}

/// Tagged density query, used by the CLI and by tabulation helpers.
struct KernelQuery {
  Process process = Process::QNormal;
  double q = 0.0;
  double t1 = 0.0;
  double t2 = 1.0;
  double y1 = 0.0;
};

/// Evaluates the density of `query` at y2 (the free variable). For the
/// stationary q-OU kernel the time lag is t2 - t1; marginals use t2 as time.
double evaluate(const KernelQuery& query, double y2);

/// Support of the free variable of `query`.
Support support_of(const KernelQuery& query);

/// prod_k (n0_k + n2_k y^2) / (d0_k + d1_k y + d2_k y^2) with coefficients
/// tabulated once, so that one kernel row can be evaluated at many y.
template <typename Scalar>
class QuadraticRatioProduct {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  QuadraticRatioProduct() = default;
  QuadraticRatioProduct(Array n0, Array n2, Array d0, Array d1, Array d2)
      : n0_(std::move(n0)), n2_(std::move(n2)), d0_(std::move(d0)), d1_(std::move(d1)), d2_(std::move(d2)) {}

  Scalar operator()(Scalar y) const {
    if (n0_.size() == 0) return Scalar(1);
    const Scalar y2 = y * y;
    const Scalar direct = ((n0_ + n2_ * y2) / (d0_ + y * (d1_ + d2_ * y))).prod();
    const Scalar mag = std::abs(direct);
    if (std::isfinite(direct) && mag < Scalar(1e300) && mag > Scalar(1e-300)) return direct;
    return std::exp(((n0_ + n2_ * y2) / (d0_ + y * (d1_ + d2_ * y))).log().sum());
  }

  Eigen::Index terms() const { return n0_.size(); }

 private:
  Array n0_, n2_, d0_, d1_, d2_;
};

/// One row y2 -> kernel(y1 -> y2) of the q-OU or q-BM transition density with
/// every y2-independent quantity precomputed. Agrees with the scalar kernels
/// to rounding.
template <typename Scalar>
class TransitionRow {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  static TransitionRow qou(const QParams<Scalar>& p, Scalar delta, Scalar x, const TruncationPolicy& policy = {}) {
    if (!(delta > Scalar(0))) raise(ErrorKind::InvalidTime, "q-OU kernel needs delta > 0");
    if (!(std::abs(x) <= p.x_plus * (Scalar(1) + Scalar(detail::kBoundaryClamp)))) {
      raise(ErrorKind::InvalidState, "q-OU start state outside support");
    }
    const Scalar q = p.q;
    const int K = truncation_index(q, policy);
    Array n0(K), n2(K), d0(K), d1(K), d2(K);
    const Scalar e = std::exp(-delta);
    const Scalar one_minus_q = Scalar(1) - q;
    Scalar qk(1);
    for (int k = 1; k <= K; ++k) {
      qk *= q;
      const Scalar e2q2k = e * e * qk * qk;
      const Scalar lead = Scalar(1) - e2q2k;
      n0(k - 1) = (Scalar(1) + qk) * (Scalar(1) + qk);
      n2(k - 1) = -one_minus_q * qk;
      d0(k - 1) = lead * lead + one_minus_q * e2q2k * x * x;
      d1(k - 1) = -one_minus_q * e * qk * (Scalar(1) + e2q2k) * x;
      d2(k - 1) = one_minus_q * e2q2k;
    }
    TransitionRow row;
    row.process_ = Process::QOU;
    row.q_ = q;
    row.x_ = x;
    row.delta_ = delta;
    row.bound_root_ = Scalar(1);
    row.hi_ = p.x_plus;
    row.prefactor_ = -std::expm1(Scalar(-2) * delta) * q_pochhammer_inf(e * e * q, q, policy) *
                     std::sqrt(one_minus_q) * q_factorial_inf(q, policy) /
                     (Scalar(2) * std::numbers::pi_v<Scalar>);
    row.tail_ = QuadraticRatioProduct<Scalar>(std::move(n0), std::move(n2), std::move(d0), std::move(d1),
                                              std::move(d2));
    return row;
  }

  static TransitionRow qbm(const QParams<Scalar>& p, Scalar t1, Scalar t2, Scalar y1,
                           const TruncationPolicy& policy = {}) {
    detail::require_interval(t1, t2);
    const Scalar q = p.q;
    const Scalar one_minus_q = Scalar(1) - q;
    const Scalar bound1 = Scalar(2) * std::sqrt(t1 / one_minus_q);
    if (!(std::abs(y1) <= bound1 * (Scalar(1) + Scalar(detail::kBoundaryClamp)) +
                              Scalar(std::numeric_limits<double>::min()))) {
      raise(ErrorKind::InvalidState, "q-BM start state outside support");
    }
    const int K = truncation_index(q, policy);
    Array n0(K), n2(K), d0(K), d1(K), d2(K);
    const Scalar scale = Scalar(1) / (t2 * t2);
    Scalar qk(1);
    for (int k = 1; k <= K; ++k) {
      qk *= q;
      const Scalar q2k = qk * qk;
      const Scalar a = (t2 - t1 * qk) * (Scalar(1) - q * qk) * scale;
      const Scalar lead = t2 - t1 * q2k;
      n0(k - 1) = a * t2 * (Scalar(1) + qk) * (Scalar(1) + qk);
      n2(k - 1) = -a * one_minus_q * qk;
      d0(k - 1) = (lead * lead + one_minus_q * t2 * y1 * y1 * q2k) * scale;
      d1(k - 1) = -one_minus_q * qk * (t2 + t1 * q2k) * y1 * scale;
      d2(k - 1) = one_minus_q * t1 * q2k * scale;
    }
    TransitionRow row;
    row.process_ = Process::QBM;
    row.q_ = q;
    row.x_ = y1;
    row.t1_ = t1;
    row.t2_ = t2;
    row.bound_root_ = std::sqrt(t2);
    row.hi_ = Scalar(2) * std::sqrt(t2 / one_minus_q);
    row.prefactor_ = one_minus_q * std::sqrt(one_minus_q) * (t2 - t1) / (Scalar(2) * std::numbers::pi_v<Scalar>);
    row.tail_ = QuadraticRatioProduct<Scalar>(std::move(n0), std::move(n2), std::move(d0), std::move(d1),
                                              std::move(d2));
    return row;
  }

  Scalar operator()(Scalar y) const {
    if (!(std::abs(y) < hi_)) return Scalar(0);
    const Scalar gap = detail::boundary_gap(q_, bound_root_, y);
    const Scalar phi0 = process_ == Process::QOU ? detail::phi0_nonneg(q_, delta_, x_, y)
                                                 : detail::phi_star0_stable(q_, t1_, t2_, x_, y);
    return prefactor_ * detail::sqrt_clamped(gap) / phi0 * tail_(y);
  }

  Support support() const { return {double(-hi_), double(hi_)}; }
  Process process() const { return process_; }

 private:
  TransitionRow() = default;

  Process process_ = Process::QOU;
  Scalar q_{0}, x_{0}, delta_{0}, t1_{0}, t2_{0};
  Scalar bound_root_{1}, hi_{0}, prefactor_{0};
  QuadraticRatioProduct<Scalar> tail_;
};

}  // namespace qtangent
