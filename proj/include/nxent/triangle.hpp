#pragma once

// Expectation matching and the nonextensive triangle equality
//
//   I_q(l||r) = I_q(l||p) + I_q(p||r) + (q-1) I_q(l||p) I_q(p||r)
//
// where p is the minimum relative-entropy posterior whose targets satisfy
// the self-consistent matching condition
//
//   <u_m>_q = <w_m>_q / (1 - (1-q) I_q(l||p)).

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nxent/distribution.hpp"
#include "nxent/errors.hpp"
#include "nxent/functionals.hpp"
#include "nxent/q_algebra.hpp"
#include "nxent/solvers.hpp"

namespace nxent {

struct MatchResult {
  Eigen::VectorXd targets;  // matched q-expectation targets
  SolveResult posterior;
  double divergence_lp = 0.0;  // I_q(l || posterior)
  int iterations = 0;
};

struct TriangleReport {
  double d_lr = 0.0;
  double d_lp = 0.0;
  double d_pr = 0.0;
  // d_lr - [d_lp + d_pr + (q-1) d_lp d_pr]
  double residual = 0.0;
  Eigen::VectorXd matched_targets;
  int fixed_point_iterations = 0;
  ConstraintKind kind = ConstraintKind::QExpectation;
  // The matched targets minimize I_q(l||p) for plain q-expectations; no such
  // claim is made for the normalized pipeline.
  bool matching_minimizes_dlp = true;
};

// Finds the self-consistent targets <u_m>_q = <w_m>_q / (1 - (1-q) d_lp) by
// damped fixed-point iteration, re-solving the minxent problem at each step.
// <w_m>_q are the q-expectations of l; at q = 1 the targets are exactly
// <w_m>_1 and the loop exits on its first pass.
inline MatchResult expectation_match(const Distribution& l,
                                     const Distribution& prior,
                                     const std::vector<MomentFunction>& u,
                                     const QIndex& q,
                                     const SolverOptions& opts = {}) {
  if (!absolutely_continuous(l, prior)) {
    throw AbsoluteContinuityError(
        "expectation_match: l must be absolutely continuous w.r.t. the prior");
  }
  const Eigen::Index mcount = static_cast<Eigen::Index>(u.size());
  Eigen::VectorXd w(mcount);
  for (Eigen::Index m = 0; m < mcount; ++m) {
    w[m] = q_expectation(l, u[m], q);
  }
  const double coeff = q.classical() ? 0.0 : q.one_minus_q();
  const double gamma = 0.5;
  const int max_iter = 200;

  // The inner solves run tighter than the caller's contract: the triangle
  // residual inherits the multiplier error with an O(1) factor.
  SolverOptions inner = opts;
  inner.tolerance = std::min(opts.tolerance, 1e-12);
  inner.outer_tolerance = std::min(opts.outer_tolerance, 1e-12);

  Eigen::VectorXd t = w;
  Eigen::VectorXd t_solved = w;
  bool have_solved = false;
  double change = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    SolveResult post = [&] {
      // The damped target update can overshoot the family's reachable
      // range transiently; back the step off toward the last solvable
      // targets instead of giving up.
      for (int back = 0;; ++back) {
        try {
          return solve_minxent(
              prior, ConstraintSet(u, t, ConstraintKind::QExpectation), q,
              inner);
        } catch (const ConvergenceError&) {
          if (!have_solved || back >= 12) throw;
          t = 0.5 * (t + t_solved);
        }
      }
    }();
    t_solved = t;
    have_solved = true;
    if (post.multipliers.size() > 0 &&
        post.multipliers.lpNorm<Eigen::Infinity>() > 1e6) {
      // The posterior family degenerates as the multipliers diverge; the
      // matching condition has no finite solution for this instance.
      throw ConvergenceError(
          "expectation_match: posterior multipliers diverge; matched targets "
          "have no finite solution",
          it, post.multipliers.lpNorm<Eigen::Infinity>());
    }
    if (!absolutely_continuous(l, post.distribution)) {
      throw AbsoluteContinuityError(
          "expectation_match: posterior support excludes mass of l");
    }
    const double d = tsallis_relative_entropy(l, post.distribution, q);
    const double denom = 1.0 - coeff * d;
    if (!(denom > 0.0)) {
      throw MatchingDegenerateError(
          "expectation_match: denominator 1 - (1-q) I_q(l||p) = " +
          std::to_string(denom));
    }
    const Eigen::VectorXd t_next = w / denom;
    double scale = 1.0;
    change = 0.0;
    if (mcount > 0) {
      change = (t_next - t).lpNorm<Eigen::Infinity>();
      scale = std::max(1.0, t.lpNorm<Eigen::Infinity>());
    }
    if (change < 1e-10 * scale) {
      return MatchResult{t, std::move(post), d, it};
    }
    t = (1.0 - gamma) * t + gamma * t_next;
  }
  throw ConvergenceError("expectation_match: fixed point did not converge",
                         max_iter, change);
}

// Runs expectation matching and evaluates the three divergences of the
// triangle identity.
inline TriangleReport verify_triangle(const Distribution& l,
                                      const Distribution& prior,
                                      const std::vector<MomentFunction>& u,
                                      const QIndex& q,
                                      const SolverOptions& opts = {}) {
  MatchResult match = expectation_match(l, prior, u, q, opts);
  TriangleReport rep;
  rep.d_lr = tsallis_relative_entropy(l, prior, q);
  rep.d_lp = match.divergence_lp;
  rep.d_pr = match.posterior.divergence;
  rep.residual =
      rep.d_lr - pseudo_add(rep.d_lp, rep.d_pr, q, PseudoAddMode::Divergence);
  rep.matched_targets = match.targets;
  rep.fixed_point_iterations = match.iterations;
  rep.kind = ConstraintKind::QExpectation;
  rep.matching_minimizes_dlp = true;
  return rep;
}

// Normalized-constraint variant: the posterior targets are set directly to
// the normalized q-expectations of l (no correction factor), and minimality
// of d_lp is not claimed.
inline TriangleReport verify_triangle_normalized(
    const Distribution& l, const Distribution& prior,
    const std::vector<MomentFunction>& u, const QIndex& q,
    const SolverOptions& opts = {}) {
  if (!absolutely_continuous(l, prior)) {
    throw AbsoluteContinuityError(
        "verify_triangle_normalized: l must be absolutely continuous w.r.t. "
        "the prior");
  }
  const Eigen::Index mcount = static_cast<Eigen::Index>(u.size());
  Eigen::VectorXd t(mcount);
  for (Eigen::Index m = 0; m < mcount; ++m) {
    t[m] = normalized_q_expectation(l, u[m], q);
  }
  SolverOptions inner = opts;
  inner.tolerance = std::min(opts.tolerance, 1e-12);
  inner.outer_tolerance = std::min(opts.outer_tolerance, 1e-12);
  SolveResult post = solve_normalized(
      prior, ConstraintSet(u, t, ConstraintKind::NormalizedQExpectation), q,
      inner);
  if (!absolutely_continuous(l, post.distribution)) {
    throw AbsoluteContinuityError(
        "verify_triangle_normalized: posterior support excludes mass of l");
  }
  TriangleReport rep;
  rep.d_lr = tsallis_relative_entropy(l, prior, q);
  rep.d_lp = tsallis_relative_entropy(l, post.distribution, q);
  rep.d_pr = post.divergence;
  rep.residual =
      rep.d_lr - pseudo_add(rep.d_lp, rep.d_pr, q, PseudoAddMode::Divergence);
  rep.matched_targets = t;
  rep.fixed_point_iterations = post.outer_iterations;
  rep.kind = ConstraintKind::NormalizedQExpectation;
  rep.matching_minimizes_dlp = false;
  return rep;
}

}  // namespace nxent
