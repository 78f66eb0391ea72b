#pragma once

// q-deformed algebra: the q-logarithm, q-exponential, q-product and the
// pseudo-additive combiner. Everything here is a pure function of its
// arguments; the q -> 1 limits are handled by an explicit classical branch
// rather than by the deformed formulas, which cancel catastrophically as
// 1-q -> 0.

#include <cmath>
#include <concepts>
#include <string>

#include <Eigen/Core>

#include "nxent/errors.hpp"

namespace nxent {

// Entropic index q > 0. |q - 1| < classical_eps flags the classical
// (Shannon/KL) branch.
class QIndex {
 public:
  static constexpr double kDefaultClassicalEps = 1e-8;

  explicit QIndex(double q, double classical_eps = kDefaultClassicalEps)
      : q_(q), eps_(classical_eps) {
    if (!std::isfinite(q) || !(q > 0.0)) {
      throw DomainError("QIndex: q must be a positive real, got " +
                        std::to_string(q));
    }
  }

  double value() const noexcept { return q_; }
  double one_minus_q() const noexcept { return 1.0 - q_; }
  bool classical() const noexcept { return std::abs(q_ - 1.0) < eps_; }

 private:
  double q_;
  double eps_;
};

// Sign convention of the pseudo-additive cross term: entropies compose with
// coefficient (1-q), divergences with (q-1).
enum class PseudoAddMode { Entropy, Divergence };

namespace detail {

template <std::floating_point Scalar>
Scalar ln_q_impl(Scalar x, const QIndex& q) {
  if (!(x > Scalar(0))) {
    throw DomainError("ln_q: argument must be positive");
  }
  if (q.classical()) return std::log(x);
  const Scalar omq = static_cast<Scalar>(q.one_minus_q());
  return std::expm1(omq * std::log(x)) / omq;
}

template <std::floating_point Scalar>
Scalar exp_q_impl(Scalar x, const QIndex& q) {
  if (q.classical()) return std::exp(x);
  const Scalar omq = static_cast<Scalar>(q.one_minus_q());
  const Scalar t = omq * x;
  if (t < Scalar(-1)) return Scalar(0);
  // t == -1 falls through: log1p(-1) = -inf gives 0 for q < 1 and the
  // divergent limit for q > 1, matching the defining power.
  return std::exp(std::log1p(t) / omq);
}

}  // namespace detail

// ln_q x = (x^(1-q) - 1)/(1-q), natural log on the classical branch.
// Evaluated as expm1((1-q) log x)/(1-q), which is exact in the same sense
// and does not cancel for small |1-q|.
template <std::floating_point Scalar>
Scalar ln_q(Scalar x, const QIndex& q) {
  return detail::ln_q_impl(x, q);
}

// e_q^x = [1 + (1-q)x]^(1/(1-q)) where the base is nonnegative, exactly 0
// below the Tsallis cut-off; e^x on the classical branch.
template <std::floating_point Scalar>
Scalar exp_q(Scalar x, const QIndex& q) {
  return detail::exp_q_impl(x, q);
}

// x (x)_q y = (x^(1-q) + y^(1-q) - 1)^(1/(1-q)) while x, y and the base are
// positive, 0 otherwise; the plain product on the classical branch.
template <std::floating_point Scalar>
Scalar q_product(Scalar x, Scalar y, const QIndex& q) {
  if (!(x > Scalar(0)) || !(y > Scalar(0))) return Scalar(0);
  if (q.classical()) return x * y;
  const Scalar omq = static_cast<Scalar>(q.one_minus_q());
  // base - 1 accumulated through expm1 so that the log of the base keeps
  // full relative accuracy near q = 1.
  const Scalar s =
      std::expm1(omq * std::log(x)) + std::expm1(omq * std::log(y));
  if (s < Scalar(-1)) return Scalar(0);
  return std::exp(std::log1p(s) / omq);
}

// ln_q(x/y), evaluated in log space so that extreme ratios neither overflow
// nor lose the leading digits; algebraically equal to y^(q-1)(ln_q x - ln_q y).
template <std::floating_point Scalar>
Scalar q_log_ratio(Scalar x, Scalar y, const QIndex& q) {
  if (!(x > Scalar(0)) || !(y > Scalar(0))) {
    throw DomainError("q_log_ratio: arguments must be positive");
  }
  const Scalar d = std::log(x) - std::log(y);
  if (q.classical()) return d;
  const Scalar omq = static_cast<Scalar>(q.one_minus_q());
  return std::expm1(omq * d) / omq;
}

// a + b + coeff a b with coeff = (1-q) or (q-1) depending on mode.
inline double pseudo_add(double a, double b, const QIndex& q,
                         PseudoAddMode mode) {
  const double coeff = (mode == PseudoAddMode::Entropy) ? q.one_minus_q()
                                                        : -q.one_minus_q();
  return a + b + coeff * a * b;
}

// Pointwise array forms of the scalar kernels.
template <typename Derived>
Eigen::ArrayXd exp_q(const Eigen::ArrayBase<Derived>& x, const QIndex& q) {
  return x.derived().unaryExpr(
      [&q](double v) { return detail::exp_q_impl(v, q); });
}

template <typename Derived>
Eigen::ArrayXd ln_q(const Eigen::ArrayBase<Derived>& x, const QIndex& q) {
  return x.derived().unaryExpr(
      [&q](double v) { return detail::ln_q_impl(v, q); });
}

}  // namespace nxent
