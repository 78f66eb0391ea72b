#pragma once

// Shannon/Tsallis entropy and KL/Tsallis relative entropy on gridded
// distributions. The defining power-form is always the computational path;
// the q-logarithm representations are exposed only through the residual
// check entropy_divergence_link.

#include <cmath>

#include <Eigen/Core>

#include "nxent/distribution.hpp"
#include "nxent/errors.hpp"
#include "nxent/q_algebra.hpp"

namespace nxent {

// S_q(p) = -Int p (p^(q-1) - 1)/(q-1); Shannon entropy -Int p ln p on the
// classical branch. Points with p = 0 contribute nothing.
inline double tsallis_entropy(const Distribution& p, const QIndex& q) {
  const Eigen::ArrayXd& d = p.density();
  const Eigen::ArrayXd& w = p.grid().weights();
  double acc = 0.0;
  if (q.classical()) {
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (d[i] > 0.0) acc += w[i] * d[i] * std::log(d[i]);
    }
    return -acc;
  }
  const double qm1 = -q.one_minus_q();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] > 0.0) acc += w[i] * d[i] * std::expm1(qm1 * std::log(d[i]));
  }
  return -acc / qm1;
}

// I_q(p||r) = Int p ((p/r)^(q-1) - 1)/(q-1); Kullback-Leibler on the
// classical branch. Requires support(p) within support(r); points with
// p = 0 contribute nothing regardless of r.
inline double tsallis_relative_entropy(const Distribution& p,
                                       const Distribution& r,
                                       const QIndex& q) {
  if (!absolutely_continuous(p, r)) {
    throw AbsoluteContinuityError(
        "tsallis_relative_entropy: p has mass outside the support of r");
  }
  const Eigen::ArrayXd& dp = p.density();
  const Eigen::ArrayXd& dr = r.density();
  const Eigen::ArrayXd& w = p.grid().weights();
  double acc = 0.0;
  if (q.classical()) {
    for (Eigen::Index i = 0; i < dp.size(); ++i) {
      if (dp[i] > 0.0) acc += w[i] * dp[i] * (std::log(dp[i]) - std::log(dr[i]));
    }
    return acc;
  }
  const double qm1 = -q.one_minus_q();
  for (Eigen::Index i = 0; i < dp.size(); ++i) {
    if (dp[i] > 0.0) {
      acc += w[i] * dp[i] *
             std::expm1(qm1 * (std::log(dp[i]) - std::log(dr[i])));
    }
  }
  return acc / qm1;
}

// Residual of I_q(p||r) = -Int p^q ln_q r - S_q(p); zero up to rounding for
// every admissible pair.
inline double entropy_divergence_link(const Distribution& p,
                                      const Distribution& r, const QIndex& q) {
  const double i_q = tsallis_relative_entropy(p, r, q);
  const double s_q = tsallis_entropy(p, q);
  const Eigen::ArrayXd& dp = p.density();
  const Eigen::ArrayXd& dr = r.density();
  const Eigen::ArrayXd& w = p.grid().weights();
  const double qv = q.classical() ? 1.0 : q.value();
  double cross = 0.0;
  for (Eigen::Index i = 0; i < dp.size(); ++i) {
    if (dp[i] > 0.0) {
      cross -= w[i] * std::pow(dp[i], qv) * ln_q(dr[i], q);
    }
  }
  return i_q - (cross - s_q);
}

}  // namespace nxent
