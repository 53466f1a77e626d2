#pragma once

// q-series building blocks: infinite q-Pochhammer products, the phi/psi
// factor families of the q-OU and q-BM kernels, and a truncated evaluator for
// infinite products of term ratios. All functions are templated on the scalar
// type and are pure.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "qtangent/errors.hpp"

namespace qtangent {

/// Deformation parameter q in (-1, 1) with the endpoints of the q-normal support.
template <typename Scalar>
struct QParams {
  Scalar q;
  Scalar x_plus;
  Scalar x_minus;

  explicit QParams(Scalar q_in) : q(q_in), x_plus(0), x_minus(0) {
    if (!(q > Scalar(-1) && q < Scalar(1))) {
      raise(ErrorKind::InvalidParameter, "q must lie in (-1, 1), got " + std::to_string(double(q)));
    }
    x_plus = Scalar(2) / std::sqrt(Scalar(1) - q);
    x_minus = -x_plus;
  }
};

using QParamsd = QParams<double>;

struct TruncationPolicy {
  double rel_tol = 1e-14;
  int k_max = 10000;

  void validate() const {
    if (!(rel_tol > 0.0) || k_max < 1) {
      raise(ErrorKind::InvalidParameter, "truncation policy needs rel_tol > 0 and k_max >= 1");
    }
  }
};

namespace detail {

template <typename Scalar>
void require_unit_disc(Scalar q) {
  if (!(std::abs(q) < Scalar(1))) {
    raise(ErrorKind::NonConvergent, "q-product needs |q| < 1, got " + std::to_string(double(q)));
  }
}

template <typename Scalar>
Scalar stop_threshold(Scalar q, const TruncationPolicy& policy) {
  return Scalar(policy.rel_tol) * (Scalar(1) - std::abs(q));
}

/// Running product that moves to log space once the partial product leaves
/// [1e-300, 1e300].
template <typename Scalar>
class ProductAccumulator {
 public:
  void multiply(Scalar factor) {
    if (zero_) return;
    if (factor == Scalar(0)) {
      zero_ = true;
      return;
    }
    if (log_mode_) {
      accumulate_log(factor);
      return;
    }
    const Scalar candidate = value_ * factor;
    const Scalar mag = std::abs(candidate);
    if (!std::isfinite(candidate) || mag > Scalar(1e300) || mag < Scalar(1e-300)) {
      log_mode_ = true;
      log_abs_ = std::log(std::abs(value_));
      sign_ = value_ < Scalar(0) ? -1 : 1;
      accumulate_log(factor);
      return;
    }
    value_ = candidate;
  }

  Scalar value() const {
    if (zero_) return Scalar(0);
    if (!log_mode_) return value_;
    return Scalar(sign_) * std::exp(log_abs_);
  }

  bool in_log_space() const { return log_mode_; }

 private:
  void accumulate_log(Scalar factor) {
    log_abs_ += std::log(std::abs(factor));
    if (factor < Scalar(0)) sign_ = -sign_;
  }

  Scalar value_ = Scalar(1);
  Scalar log_abs_ = Scalar(0);
  int sign_ = 1;
  bool log_mode_ = false;
  bool zero_ = false;
};

}  // namespace detail

/// (a; q)_inf = prod_{k>=0} (1 - a q^k), truncated once |a q^k| < rel_tol (1 - |q|).
template <typename Scalar>
Scalar q_pochhammer_inf(Scalar a, Scalar q, const TruncationPolicy& policy = {}) {
  detail::require_unit_disc(q);
  policy.validate();
  const Scalar threshold = detail::stop_threshold(q, policy);
  detail::ProductAccumulator<Scalar> acc;
  Scalar qk(1);
  for (int k = 0; k < policy.k_max; ++k) {
    const Scalar term = a * qk;
    const Scalar factor = Scalar(1) - term;
    if (factor == Scalar(0)) return Scalar(0);
    acc.multiply(factor);
    if (std::abs(term) < threshold) return acc.value();
    qk *= q;
  }
  raise(ErrorKind::TruncationExceeded,
        "q-Pochhammer product did not reach tolerance within k_max=" + std::to_string(policy.k_max));
}

/// (q)_inf = prod_{k>=1} (1 - q^k).
template <typename Scalar>
Scalar q_factorial_inf(Scalar q, const TruncationPolicy& policy = {}) {
  return q_pochhammer_inf(q, q, policy);
}

/// phi_{q,k}(delta, x, y), the k-th denominator factor of the q-OU kernel,
/// evaluated as the displayed quadratic form in (x, y).
template <typename Scalar>
Scalar phi_qk(Scalar q, int k, Scalar delta, Scalar x, Scalar y) {
  const Scalar e = std::exp(-delta);
  const Scalar qk = std::pow(q, k);
  const Scalar e2q2k = e * e * qk * qk;
  const Scalar lead = k == 0 ? -std::expm1(Scalar(-2) * delta) : Scalar(1) - e2q2k;
  const Scalar one_minus_q = Scalar(1) - q;
  return lead * lead - one_minus_q * e * qk * (Scalar(1) + e2q2k) * x * y +
         one_minus_q * e2q2k * (x * x + y * y);
}

/// psi_{q,k}(x) = (1 + q^k)^2 - (1 - q) x^2 q^k.
template <typename Scalar>
Scalar psi_qk(Scalar q, int k, Scalar x) {
  const Scalar qk = std::pow(q, k);
  const Scalar a = Scalar(1) + qk;
  return a * a - (Scalar(1) - q) * x * x * qk;
}

/// phi*_{q,k}(t1, t2, y1, y2), denominator factor of the q-BM kernel.
template <typename Scalar>
Scalar phi_star(Scalar q, int k, Scalar t1, Scalar t2, Scalar y1, Scalar y2) {
  const Scalar qk = std::pow(q, k);
  const Scalar q2k = qk * qk;
  const Scalar lead = t2 - t1 * q2k;
  const Scalar one_minus_q = Scalar(1) - q;
  return lead * lead - one_minus_q * qk * (t2 + t1 * q2k) * y1 * y2 +
         one_minus_q * (t1 * y2 * y2 + t2 * y1 * y1) * q2k;
}

/// psi*_{q,k}(t1, t2, y2), numerator factor of the q-BM kernel (k >= 1).
template <typename Scalar>
Scalar psi_star(Scalar q, int k, Scalar t1, Scalar t2, Scalar y2) {
  const Scalar qk = std::pow(q, k);
  const Scalar a = Scalar(1) + qk;
  return (t2 - t1 * qk) * (Scalar(1) - q * qk) * (t2 * a * a - (Scalar(1) - q) * y2 * y2 * qk);
}

/// Number of factors k = 1..K kept by the truncation rule; K is the first
/// index with |q|^K < rel_tol (1 - |q|).
template <typename Scalar>
int truncation_index(Scalar q, const TruncationPolicy& policy = {}) {
  detail::require_unit_disc(q);
  policy.validate();
  const Scalar threshold = detail::stop_threshold(q, policy);
  Scalar qk = std::abs(q);
  for (int k = 1; k <= policy.k_max; ++k) {
    if (qk < threshold) return k;
    qk *= std::abs(q);
  }
  raise(ErrorKind::TruncationExceeded, "truncation index exceeds k_max=" + std::to_string(policy.k_max));
}

/// prod_{k>=1} numerator(k) / denominator(k) for term families that tend to 1
/// geometrically in k. Truncates once |q|^k and |ratio - 1| both fall below
/// rel_tol (1 - |q|).
template <typename Scalar, typename Numerator, typename Denominator>
Scalar tail_product_ratio(Scalar q, Numerator&& numerator, Denominator&& denominator,
                          const TruncationPolicy& policy = {}) {
  detail::require_unit_disc(q);
  policy.validate();
  const Scalar threshold = detail::stop_threshold(q, policy);
  detail::ProductAccumulator<Scalar> acc;
  Scalar qk(1);
  for (int k = 1; k <= policy.k_max; ++k) {
    qk *= q;
    const Scalar num = numerator(k);
    const Scalar den = denominator(k);
    if (!(den > Scalar(0))) {
      raise(ErrorKind::DivergentTerm, "denominator term " + std::to_string(k) + " is not positive");
    }
    const Scalar ratio = num / den;
    acc.multiply(ratio);
    if (std::abs(qk) < threshold && std::abs(ratio - Scalar(1)) < threshold) return acc.value();
  }
  raise(ErrorKind::TruncationExceeded,
        "ratio product did not reach tolerance within k_max=" + std::to_string(policy.k_max));
}

}  // namespace qtangent
