#pragma once

// Lagrange-multiplier solvers for the generalized equilibrium densities:
//
//   maxent    K(x) = [1 - (1-q) sum_m beta_m u_m(x)]^(1/(1-q))
//   minxent   K(x) = [r(x)^(1-q) - (1-q) sum_m beta_m u_m(x)]^(1/(1-q))
//   normalized-constraint minxent, where the multipliers couple to
//             (u_m(x) - t_m)/Int p^q and the density is self-referential.
//
// The multipliers are found by damped Newton iteration on the residual map
// beta -> (moments of the normalized density - targets), with the Jacobian
// in closed form from dK/dbeta_n = -v_n K^q. A bisection fallback covers
// single-constraint problems where the Tsallis cut-off makes the residual
// non-smooth. The normalized case wraps the same solve in a damped fixed
// point on c = Int p^q.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nxent/distribution.hpp"
#include "nxent/errors.hpp"
#include "nxent/functionals.hpp"
#include "nxent/q_algebra.hpp"

namespace nxent {

enum class SolveBranch { MaxEnt, MinXent, MinXentNormalized, Classical };

struct SolverOptions {
  double tolerance = 1e-10;        // constraint residual, inf-norm
  int max_iterations = 200;        // Newton steps per multiplier solve
  int max_outer_iterations = 500;  // fixed-point steps (normalized case)
  double outer_damping = 0.5;
  double outer_tolerance = 1e-10;
  double fd_step = 1e-5;           // thermo_identities finite differences
};

struct SolveResult {
  Distribution distribution;
  Eigen::VectorXd multipliers;  // beta_m
  double partition_value = 0.0;
  double divergence = 0.0;  // I_q(p||r); S_q(p) for the maxent branch
  int iterations = 0;       // Newton steps, all inner solves combined
  int outer_iterations = 0;
  double residual_norm = 0.0;
  SolveBranch branch = SolveBranch::MinXent;
  double escort_mass = 0.0;            // Int p^q at the solution
  Eigen::VectorXd multipliers_escort;  // beta'_m = beta_m / escort_mass
  std::optional<Distribution> prior;
};

namespace detail {

inline Eigen::MatrixXd moment_matrix(const std::vector<MomentFunction>& u,
                                     const SupportGrid& grid) {
  Eigen::MatrixXd m(grid.size(), static_cast<Eigen::Index>(u.size()));
  for (Eigen::Index k = 0; k < m.cols(); ++k) {
    if (u[k].values.size() != grid.size()) {
      throw DimensionError("moment function '" + u[k].label + "' has length " +
                           std::to_string(u[k].values.size()) +
                           " on a grid of size " +
                           std::to_string(grid.size()));
    }
    m.col(k) = u[k].values.matrix();
  }
  return m;
}

// base^(1/(1-q)) with the cut-off: exactly 0 for base < 0.
inline double cutoff_power(double base, double omq) {
  if (base < 0.0) return 0.0;
  return std::pow(base, 1.0 / omq);
}

// [r^(1-q) - (1-q) s]^(1/(1-q)) pointwise, 0 off the prior support;
// r e^{-s} on the classical branch. With r = 1 this is exp_q(-s).
inline Eigen::ArrayXd prior_kernel(const Eigen::ArrayXd& r,
                                   const Eigen::ArrayXd& s, const QIndex& q) {
  if (q.classical()) return r * (-s).exp();
  const double omq = q.one_minus_q();
  Eigen::ArrayXd out(r.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    out[i] = r[i] > 0.0
                 ? cutoff_power(std::pow(r[i], omq) - omq * s[i], omq)
                 : 0.0;
  }
  return out;
}

// k^e where k > 0, exactly 0 where k = 0 (keeps cut-off points out of the
// integrals even for exponents <= 0).
inline Eigen::ArrayXd masked_pow(const Eigen::ArrayXd& k, double e) {
  Eigen::ArrayXd out(k.size());
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    out[i] = k[i] > 0.0 ? std::pow(k[i], e) : 0.0;
  }
  return out;
}

// Residual map F(beta) = moments(K_beta / Z) - targets for kernels of the
// family dK/dbeta_n = -v_n K^q; w are the moment functions entering the
// residual (w = v except in the normalized case, where v carries the 1/c).
struct MultiplierModel {
  const SupportGrid& grid;
  Eigen::ArrayXd prior_density;  // ones for maxent
  Eigen::MatrixXd v;
  Eigen::MatrixXd w;
  Eigen::VectorXd targets;
  QIndex q;

  double qv() const { return q.classical() ? 1.0 : q.value(); }

  Eigen::ArrayXd kernel(const Eigen::VectorXd& beta) const {
    return prior_kernel(prior_density, (v * beta).array(), q);
  }
};

struct ResidualEval {
  bool valid = false;
  double z = 0.0;
  Eigen::ArrayXd kern;
  Eigen::VectorXd f;
  double norm = std::numeric_limits<double>::infinity();
};

inline ResidualEval eval_residual(const MultiplierModel& m,
                                  const Eigen::VectorXd& beta) {
  ResidualEval ev;
  ev.kern = m.kernel(beta);
  if (!ev.kern.isFinite().all()) return ev;
  ev.z = integrate(ev.kern, m.grid);
  if (!(ev.z > 0.0) || !std::isfinite(ev.z)) return ev;
  const double qv = m.qv();
  if (m.targets.size() == 0) {
    ev.f.resize(0);
    ev.valid = true;
    ev.norm = 0.0;
    return ev;
  }
  const Eigen::ArrayXd wkq = m.grid.weights() * masked_pow(ev.kern, qv);
  const Eigen::VectorXd a = m.w.transpose() * wkq.matrix();
  ev.f = a / std::pow(ev.z, qv) - m.targets;
  if (!ev.f.allFinite()) return ev;
  ev.valid = true;
  ev.norm = ev.f.lpNorm<Eigen::Infinity>();
  return ev;
}

inline Eigen::MatrixXd eval_jacobian(const MultiplierModel& m,
                                     const ResidualEval& ev) {
  const double qv = m.qv();
  const Eigen::ArrayXd& wts = m.grid.weights();
  const Eigen::ArrayXd wkq = wts * masked_pow(ev.kern, qv);
  const Eigen::ArrayXd wk2 = wts * masked_pow(ev.kern, 2.0 * qv - 1.0);
  const Eigen::VectorXd a = m.w.transpose() * wkq.matrix();
  const Eigen::VectorXd b = m.v.transpose() * wkq.matrix();
  const Eigen::MatrixXd c =
      m.w.transpose() * wk2.matrix().asDiagonal() * m.v;
  const double zq = std::pow(ev.z, qv);
  return (qv / zq) * (a * b.transpose() / ev.z - c);
}

struct NewtonOutcome {
  Eigen::VectorXd beta;
  Eigen::ArrayXd kern;
  double z = 0.0;
  int iterations = 0;
  double residual_norm = 0.0;
};

// Formal divergence of the normalized kernel against the model's prior
// column (ones for maxent, where this is -S_q up to normalization). Used to
// rank multiple residual roots: the family can have several stationary
// points once the cut-off splits the support, and the minimum-divergence
// root is the solution.
inline double model_divergence(const MultiplierModel& m,
                               const ResidualEval& ev) {
  const Eigen::ArrayXd p = ev.kern / ev.z;
  const double qv = m.qv();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      const double lr = std::log(p[i]) - std::log(m.prior_density[i]);
      acc += m.grid.weights()[i] * p[i] *
             (qv == 1.0 ? lr : std::expm1((qv - 1.0) * lr) / (qv - 1.0));
    }
  }
  return acc;
}

// Scalar fallback for M = 1 when Newton stalls on a cut-off kink: probe
// points uncover every sign change of the residual (including valleys
// between support branches that Newton can jump across), each bracket is
// bisected, and the root with the smallest divergence wins. The cut-off
// thresholds beta_i = base0_i / ((1-q) v_i), where grid point i leaves or
// enters the support, are the branch boundaries, so each interval between
// consecutive thresholds is sampled explicitly on top of a geometric far
// field.
inline NewtonOutcome bisect_multiplier(const MultiplierModel& m,
                                       const SolverOptions& opts,
                                       const Eigen::VectorXd& beta_start,
                                       const ResidualEval& ev_start,
                                       int iters_used) {
  auto eval_at = [&](double b) {
    Eigen::VectorXd bb(1);
    bb[0] = b;
    return eval_residual(m, bb);
  };

  std::vector<double> probes{0.0, beta_start[0]};
  for (double mag = 1.0 / 16.0; mag < 1e8; mag *= 1.35) {
    probes.push_back(mag);
    probes.push_back(-mag);
  }
  if (!m.q.classical()) {
    const double omq = m.q.one_minus_q();
    std::vector<double> thresholds;
    for (Eigen::Index i = 0; i < m.grid.size(); ++i) {
      if (!(m.prior_density[i] > 0.0)) continue;
      const double vi = m.v(i, 0);
      if (vi == 0.0) continue;
      thresholds.push_back(std::pow(m.prior_density[i], omq) / (omq * vi));
    }
    std::sort(thresholds.begin(), thresholds.end());
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      const double lo =
          i == 0 ? thresholds[i] - std::max(1.0, std::abs(thresholds[i]))
                 : thresholds[i - 1];
      const double hi = thresholds[i];
      for (int k = 0; k <= 16; ++k) {
        probes.push_back(lo + (hi - lo) * double(k) / 16.0);
      }
      if (i + 1 == thresholds.size()) {
        const double span = std::max(1.0, std::abs(hi));
        for (int k = 1; k <= 16; ++k) probes.push_back(hi + span * k / 16.0);
      }
    }
  }
  std::sort(probes.begin(), probes.end());

  struct Node {
    double b;
    double f;
  };
  std::vector<Node> valid;
  valid.reserve(probes.size());
  for (double b : probes) {
    const ResidualEval e = eval_at(b);
    if (e.valid) valid.push_back({b, e.f[0]});
  }
  if (valid.empty()) {
    throw ConvergenceError("solver: cut-off collapse across the whole scan",
                           iters_used, ev_start.norm);
  }

  int evals = static_cast<int>(probes.size());
  bool found = false;
  double best_norm = std::numeric_limits<double>::infinity();
  double best_div = std::numeric_limits<double>::infinity();
  ResidualEval best_ev;
  double best_b = 0.0;

  auto consider = [&](double b, const ResidualEval& e) {
    if (!e.valid || e.norm >= opts.tolerance) return;
    const double div = model_divergence(m, e);
    if (!found || div < best_div - 1e-14) {
      found = true;
      best_div = div;
      best_norm = e.norm;
      best_ev = e;
      best_b = b;
    }
  };

  for (std::size_t i = 0; i + 1 < valid.size(); ++i) {
    if ((valid[i].f < 0.0) == (valid[i + 1].f < 0.0)) continue;
    double lo = valid[i].b, hi = valid[i + 1].b;
    double flo = valid[i].f;
    double mid = lo;
    ResidualEval em;
    for (int it = 0; it < 200; ++it) {
      mid = 0.5 * (lo + hi);
      em = eval_at(mid);
      ++evals;
      const double fm = em.valid ? em.f[0] : valid[i + 1].f;
      if (em.valid && em.norm < opts.tolerance) break;
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
      if (hi - lo < 1e-17 * std::max(1.0, std::abs(lo))) break;
    }
    consider(mid, em);
  }

  if (!found) {
    throw ConvergenceError(
        "solver: residual has no root in the scanned range; targets may be "
        "infeasible",
        iters_used + evals, ev_start.norm);
  }
  Eigen::VectorXd beta(1);
  beta[0] = best_b;
  return {beta, best_ev.kern, best_ev.z, iters_used + evals, best_norm};
}

inline NewtonOutcome solve_multipliers(const MultiplierModel& m,
                                       const SolverOptions& opts,
                                       const Eigen::VectorXd& beta0) {
  Eigen::VectorXd beta = beta0;
  ResidualEval ev = eval_residual(m, beta);
  if (!ev.valid) {
    throw ConvergenceError(
        "solver: cut-off collapse, kernel mass vanished at the initial point",
        0, std::numeric_limits<double>::infinity());
  }
  int iter = 0;
  while (ev.norm >= opts.tolerance && iter < opts.max_iterations) {
    ++iter;
    const Eigen::MatrixXd jac = eval_jacobian(m, ev);
    const Eigen::VectorXd step = jac.fullPivLu().solve(-ev.f);
    bool accepted = false;
    if (step.allFinite()) {
      double lambda = 1.0;
      while (lambda >= 1e-12) {
        const ResidualEval trial = eval_residual(m, beta + lambda * step);
        if (trial.valid && trial.norm <= (1.0 - 1e-4 * lambda) * ev.norm) {
          beta += lambda * step;
          ev = trial;
          accepted = true;
          break;
        }
        lambda *= 0.5;
      }
    }
    if (!accepted) {
      if (m.targets.size() == 1) return bisect_multiplier(m, opts, beta, ev, iter);
      throw ConvergenceError(
          "solver: Newton stagnated; targets may be infeasible", iter, ev.norm);
    }
  }
  if (ev.norm >= opts.tolerance) {
    if (m.targets.size() == 1) return bisect_multiplier(m, opts, beta, ev, iter);
    throw ConvergenceError(
        "solver: no convergence within the iteration budget", iter, ev.norm);
  }
  return {beta, ev.kern, ev.z, iter, ev.norm};
}

}  // namespace detail

// Unnormalized maxent density exp_q(-sum_m beta_m u_m(x)) pointwise.
inline Eigen::ArrayXd eval_maxent_density(const SupportGrid& grid,
                                          const std::vector<MomentFunction>& u,
                                          const Eigen::VectorXd& beta,
                                          const QIndex& q) {
  const Eigen::MatrixXd um = detail::moment_matrix(u, grid);
  if (um.cols() != beta.size()) {
    throw DimensionError("eval_maxent_density: multiplier count mismatch");
  }
  return detail::prior_kernel(Eigen::ArrayXd::Ones(grid.size()),
                              (um * beta).array(), q);
}

// Unnormalized minxent density [r^(1-q) - (1-q) sum beta_m u_m]^(1/(1-q))
// with the extended cut-off; r e^{-sum beta_m u_m} on the classical branch.
inline Eigen::ArrayXd eval_minxent_density(const Distribution& prior,
                                           const std::vector<MomentFunction>& u,
                                           const Eigen::VectorXd& beta,
                                           const QIndex& q) {
  const Eigen::MatrixXd um = detail::moment_matrix(u, prior.grid());
  if (um.cols() != beta.size()) {
    throw DimensionError("eval_minxent_density: multiplier count mismatch");
  }
  return detail::prior_kernel(prior.density(), (um * beta).array(), q);
}

// Unnormalized stationary density of the normalized-constraint problem for a
// fixed escort mass c: multipliers couple to (u_m - t_m)/c.
inline Eigen::ArrayXd eval_normalized_density(
    const Distribution& prior, const std::vector<MomentFunction>& u,
    const Eigen::VectorXd& beta, const Eigen::VectorXd& targets,
    double escort_mass, const QIndex& q) {
  Eigen::MatrixXd um = detail::moment_matrix(u, prior.grid());
  if (um.cols() != beta.size() || targets.size() != beta.size()) {
    throw DimensionError("eval_normalized_density: size mismatch");
  }
  um.rowwise() -= targets.transpose();
  return detail::prior_kernel(prior.density(),
                              (um * beta).array() / escort_mass, q);
}

// Generalized maximum-entropy solve under plain q-expectation constraints.
inline SolveResult solve_maxent(const SupportGrid& grid,
                                const ConstraintSet& cs, const QIndex& q,
                                const SolverOptions& opts = {}) {
  if (cs.kind() != ConstraintKind::QExpectation) {
    throw DomainError("solve_maxent: constraints must be plain q-expectations");
  }
  const Eigen::MatrixXd u = cs.function_matrix(grid);
  const detail::MultiplierModel model{
      grid, Eigen::ArrayXd::Ones(grid.size()), u, u, cs.targets(), q};
  const auto out = detail::solve_multipliers(
      model, opts, Eigen::VectorXd::Zero(cs.count()));

  SolveResult res{.distribution = Distribution(grid, out.kern / out.z)};
  res.multipliers = out.beta;
  res.partition_value = out.z;
  res.divergence = tsallis_entropy(res.distribution, q);
  res.iterations = out.iterations;
  res.branch = q.classical() ? SolveBranch::Classical : SolveBranch::MaxEnt;
  const double qv = q.classical() ? 1.0 : q.value();
  res.escort_mass = integrate(res.distribution.density().pow(qv), grid);
  double rn = 0.0;
  for (Eigen::Index m = 0; m < cs.count(); ++m) {
    rn = std::max(rn, std::abs(q_expectation(res.distribution,
                                             cs.functions()[m], q) -
                               cs.targets()[m]));
  }
  res.residual_norm = rn;
  return res;
}

// Minimum relative-entropy solve under plain q-expectation constraints.
inline SolveResult solve_minxent(const Distribution& prior,
                                 const ConstraintSet& cs, const QIndex& q,
                                 const SolverOptions& opts = {}) {
  if (cs.kind() != ConstraintKind::QExpectation) {
    throw DomainError(
        "solve_minxent: constraints must be plain q-expectations");
  }
  const SupportGrid& grid = prior.grid();
  const Eigen::MatrixXd u = cs.function_matrix(grid);
  const detail::MultiplierModel model{grid, prior.density(), u, u,
                                      cs.targets(), q};
  const auto out = detail::solve_multipliers(
      model, opts, Eigen::VectorXd::Zero(cs.count()));

  SolveResult res{.distribution = Distribution(grid, out.kern / out.z)};
  res.multipliers = out.beta;
  res.partition_value = out.z;
  res.divergence = tsallis_relative_entropy(res.distribution, prior, q);
  res.iterations = out.iterations;
  res.branch = q.classical() ? SolveBranch::Classical : SolveBranch::MinXent;
  const double qv = q.classical() ? 1.0 : q.value();
  res.escort_mass = integrate(res.distribution.density().pow(qv), grid);
  res.prior = prior;
  double rn = 0.0;
  for (Eigen::Index m = 0; m < cs.count(); ++m) {
    rn = std::max(rn, std::abs(q_expectation(res.distribution,
                                             cs.functions()[m], q) -
                               cs.targets()[m]));
  }
  res.residual_norm = rn;
  return res;
}

// Minimum relative-entropy solve under normalized q-expectation constraints.
// The density is self-referential through c = Int p^q; an outer damped fixed
// point on c wraps the multiplier solve at fixed c.
inline SolveResult solve_normalized(const Distribution& prior,
                                    const ConstraintSet& cs, const QIndex& q,
                                    const SolverOptions& opts = {}) {
  if (cs.kind() != ConstraintKind::NormalizedQExpectation) {
    throw DomainError(
        "solve_normalized: constraints must be normalized q-expectations");
  }
  if (q.classical()) {
    // Normalized and plain q-expectations coincide at q = 1.
    SolveResult res = solve_minxent(
        prior,
        ConstraintSet(cs.functions(), cs.targets(),
                      ConstraintKind::QExpectation),
        q, opts);
    res.branch = SolveBranch::Classical;
    res.multipliers_escort = res.multipliers / res.escort_mass;
    return res;
  }

  const SupportGrid& grid = prior.grid();
  const Eigen::MatrixXd u = cs.function_matrix(grid);
  Eigen::MatrixXd centered = u;
  centered.rowwise() -= cs.targets().transpose();

  double c = integrate(prior.density().pow(q.value()), grid);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(cs.count());
  double gamma = opts.outer_damping;
  double prev_gap = std::numeric_limits<double>::infinity();
  int stall = 0;
  int newton_total = 0;
  int outer = 0;
  bool converged = false;
  detail::NewtonOutcome out;
  double c_new = c;

  for (outer = 1; outer <= opts.max_outer_iterations; ++outer) {
    const detail::MultiplierModel model{grid, prior.density(), centered / c,
                                        centered,
                                        Eigen::VectorXd::Zero(cs.count()), q};
    SolverOptions inner = opts;
    inner.tolerance = opts.tolerance * std::min(1.0, c);
    out = detail::solve_multipliers(model, inner, beta);
    newton_total += out.iterations;
    beta = out.beta;
    c_new = integrate(detail::masked_pow(out.kern / out.z, q.value()), grid);
    const double gap = std::abs(c_new - c);
    if (gap < opts.outer_tolerance * std::max(1.0, std::abs(c))) {
      converged = true;
      break;
    }
    if (gap > 0.9 * prev_gap) {
      if (++stall >= 25) {
        stall = 0;
        gamma *= 0.5;
        if (gamma < 1.0 / 64.0) {
          throw ConvergenceError(
              "solve_normalized: fixed point oscillates, damping floor reached",
              outer, gap);
        }
      }
    } else {
      stall = 0;
    }
    prev_gap = gap;
    const double c_next = (1.0 - gamma) * c + gamma * c_new;
    beta *= c_next / c;  // the multipliers scale with c along the fixed point
    c = c_next;
  }
  if (!converged) {
    throw ConvergenceError("solve_normalized: fixed point did not converge",
                           outer, std::abs(c_new - c));
  }

  SolveResult res{.distribution = Distribution(grid, out.kern / out.z)};
  res.multipliers = beta;
  res.partition_value = out.z;
  res.divergence = tsallis_relative_entropy(res.distribution, prior, q);
  res.iterations = newton_total;
  res.outer_iterations = outer;
  res.branch = SolveBranch::MinXentNormalized;
  res.escort_mass = c_new;
  res.multipliers_escort = beta / c_new;
  res.prior = prior;
  double rn = 0.0;
  for (Eigen::Index m = 0; m < cs.count(); ++m) {
    rn = std::max(rn, std::abs(normalized_q_expectation(
                                   res.distribution, cs.functions()[m], q) -
                               cs.targets()[m]));
  }
  res.residual_norm = rn;
  return res;
}

// Dispatch on the constraint kind.
inline SolveResult solve(const Distribution& prior, const ConstraintSet& cs,
                         const QIndex& q, const SolverOptions& opts = {}) {
  return cs.kind() == ConstraintKind::QExpectation
             ? solve_minxent(prior, cs, q, opts)
             : solve_normalized(prior, cs, q, opts);
}

struct ThermoReport {
  // Algebraic residual of the minimum-value identity:
  //   I_q = -ln_q Zhat - sum_m beta_m <u_m>_q        (minxent)
  //   I_q = -ln_q Zbar                                (normalized case)
  //   S_q =  ln_q Z + sum_m beta_m <u_m>_q            (maxent)
  double potential_identity_residual = 0.0;
  // Central finite differences of the log-partition in beta_m against the
  // achieved moments, and of the divergence in the targets against the
  // multipliers.
  Eigen::VectorXd log_partition_derivative_residuals;
  Eigen::VectorXd divergence_derivative_residuals;
  double fd_step = 0.0;
};

inline ThermoReport thermo_identities(const SolveResult& result,
                                      const ConstraintSet& cs, const QIndex& q,
                                      const SolverOptions& opts = {}) {
  const Eigen::Index mcount = cs.count();
  const bool normalized = result.branch == SolveBranch::MinXentNormalized ||
                          (result.branch == SolveBranch::Classical &&
                           cs.kind() == ConstraintKind::NormalizedQExpectation);
  const bool maxent = !result.prior.has_value();
  const SupportGrid& grid = result.distribution.grid();

  ThermoReport rep;
  rep.fd_step = opts.fd_step;
  rep.log_partition_derivative_residuals.resize(mcount);
  rep.divergence_derivative_residuals.resize(mcount);

  Eigen::VectorXd mom(mcount);
  for (Eigen::Index m = 0; m < mcount; ++m) {
    mom[m] = normalized ? normalized_q_expectation(result.distribution,
                                                   cs.functions()[m], q)
                        : q_expectation(result.distribution,
                                        cs.functions()[m], q);
  }

  const double lnz = ln_q(result.partition_value, q);
  if (normalized && result.branch == SolveBranch::MinXentNormalized) {
    rep.potential_identity_residual = result.divergence + lnz;
  } else if (maxent) {
    rep.potential_identity_residual =
        result.divergence - (lnz + result.multipliers.dot(mom));
  } else {
    rep.potential_identity_residual =
        result.divergence + lnz + result.multipliers.dot(mom);
  }

  const double h = opts.fd_step;
  for (Eigen::Index m = 0; m < mcount; ++m) {
    auto log_partition_at = [&](double bm) {
      Eigen::VectorXd b = result.multipliers;
      b[m] = bm;
      if (normalized && result.branch == SolveBranch::MinXentNormalized) {
        const Eigen::ArrayXd k =
            eval_normalized_density(*result.prior, cs.functions(), b,
                                    cs.targets(), result.escort_mass, q);
        // Shifted potential ln_q Zhat = ln_q Zbar - sum_m beta_m t_m.
        return ln_q(integrate(k, grid), q) - b.dot(cs.targets());
      }
      const Eigen::ArrayXd k =
          maxent ? eval_maxent_density(grid, cs.functions(), b, q)
                 : eval_minxent_density(*result.prior, cs.functions(), b, q);
      return ln_q(integrate(k, grid), q);
    };
    const double bm = result.multipliers[m];
    const double slope =
        (log_partition_at(bm + h) - log_partition_at(bm - h)) / (2.0 * h);
    rep.log_partition_derivative_residuals[m] = slope + mom[m];
  }

  SolverOptions tight = opts;
  tight.tolerance = std::min(opts.tolerance, 1e-12);
  for (Eigen::Index m = 0; m < mcount; ++m) {
    auto divergence_at = [&](double tm) {
      Eigen::VectorXd t2 = cs.targets();
      t2[m] = tm;
      const ConstraintSet cs2 = cs.with_targets(t2);
      const SolveResult r2 =
          normalized ? solve_normalized(*result.prior, cs2, q, tight)
          : maxent   ? solve_maxent(grid, cs2, q, tight)
                     : solve_minxent(*result.prior, cs2, q, tight);
      return r2.divergence;
    };
    const double tm = cs.targets()[m];
    const double slope =
        (divergence_at(tm + h) - divergence_at(tm - h)) / (2.0 * h);
    rep.divergence_derivative_residuals[m] =
        maxent ? slope - result.multipliers[m]
               : slope + result.multipliers[m];
  }
  return rep;
}

struct UniformPriorReport {
  SolveResult maxent;
  SolveResult minxent_uniform;
  double support_weight = 0.0;  // W
  // beta^(S)_m - W^(1-q) beta^(I)_m, per constraint.
  Eigen::VectorXd multiplier_relation_residuals;
  double density_gap = 0.0;  // inf-norm of the two solved densities
  bool multipliers_expected_equal = false;
};

// Same targets through the maxent solve and through minxent with the uniform
// prior: equal distributions, multipliers related by beta^(S) = W^(1-q)
// beta^(I).
inline UniformPriorReport uniform_prior_comparison(
    const SupportGrid& grid, const ConstraintSet& cs, const QIndex& q,
    const SolverOptions& opts = {}) {
  UniformPriorReport rep{
      .maxent = solve_maxent(grid, cs, q, opts),
      .minxent_uniform = solve_minxent(uniform_on(grid), cs, q, opts)};
  rep.support_weight = grid.total_weight();
  const double scale =
      q.classical() ? 1.0 : std::pow(rep.support_weight, q.one_minus_q());
  rep.multiplier_relation_residuals =
      rep.maxent.multipliers - scale * rep.minxent_uniform.multipliers;
  rep.density_gap = (rep.maxent.distribution.density() -
                     rep.minxent_uniform.distribution.density())
                        .abs()
                        .maxCoeff();
  rep.multipliers_expected_equal =
      q.classical() || std::abs(rep.support_weight - 1.0) < 1e-12;
  return rep;
}

}  // namespace nxent
