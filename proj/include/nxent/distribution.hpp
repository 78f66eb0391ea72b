#pragma once

// Distributions on finite weighted grids. A SupportGrid covers both discrete
// supports (unit weights) and quadrature discretizations of densities on an
// interval; zero-density points stay on the grid so that several
// distributions can share one grid, with support implicit in the zeros.

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "nxent/errors.hpp"
#include "nxent/q_algebra.hpp"

namespace nxent {

class SupportGrid {
 public:
  // points strictly increasing, weights positive, at least one point.
  SupportGrid(Eigen::ArrayXd points, Eigen::ArrayXd weights)
      : points_(std::move(points)), weights_(std::move(weights)) {
    if (points_.size() == 0) {
      throw DimensionError("SupportGrid: at least one point required");
    }
    if (points_.size() != weights_.size()) {
      throw DimensionError("SupportGrid: " + std::to_string(points_.size()) +
                           " points vs " + std::to_string(weights_.size()) +
                           " weights");
    }
    for (Eigen::Index i = 0; i < points_.size(); ++i) {
      if (!std::isfinite(points_[i])) {
        throw DomainError("SupportGrid: nonfinite point");
      }
      if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i])) {
        throw DomainError("SupportGrid: weights must be positive");
      }
      if (i > 0 && !(points_[i] > points_[i - 1])) {
        throw DomainError("SupportGrid: points must be strictly increasing");
      }
    }
  }

  // Discrete support on the given points, all weights 1.
  static SupportGrid discrete(Eigen::ArrayXd points) {
    Eigen::ArrayXd w = Eigen::ArrayXd::Ones(points.size());
    return SupportGrid(std::move(points), std::move(w));
  }

  // Discrete support on 0, 1, ..., n-1.
  static SupportGrid discrete(Eigen::Index n) {
    return discrete(Eigen::ArrayXd::LinSpaced(n, 0.0, double(n - 1)));
  }

  // Uniform grid on [a, b] with trapezoid quadrature weights.
  static SupportGrid trapezoid(double a, double b, Eigen::Index n) {
    if (n < 2 || !(b > a)) {
      throw DomainError("SupportGrid::trapezoid: need b > a and n >= 2");
    }
    const double h = (b - a) / double(n - 1);
    Eigen::ArrayXd pts = Eigen::ArrayXd::LinSpaced(n, a, b);
    Eigen::ArrayXd w = Eigen::ArrayXd::Constant(n, h);
    w[0] = w[n - 1] = 0.5 * h;
    return SupportGrid(std::move(pts), std::move(w));
  }

  Eigen::Index size() const noexcept { return points_.size(); }
  const Eigen::ArrayXd& points() const noexcept { return points_; }
  const Eigen::ArrayXd& weights() const noexcept { return weights_; }

  // W, the total support weight (number of configurations when discrete).
  double total_weight() const { return weights_.sum(); }

 private:
  Eigen::ArrayXd points_;
  Eigen::ArrayXd weights_;
};

inline bool same_grid(const SupportGrid& a, const SupportGrid& b) {
  return a.size() == b.size() && (a.points() == b.points()).all() &&
         (a.weights() == b.weights()).all();
}

// Sum_i w_i f_i.
template <typename Derived>
double integrate(const Eigen::ArrayBase<Derived>& f, const SupportGrid& grid) {
  if (f.size() != grid.size()) {
    throw DimensionError("integrate: " + std::to_string(f.size()) +
                         " values on a grid of size " +
                         std::to_string(grid.size()));
  }
  return (f.derived() * grid.weights()).sum();
}

// Nonnegative density normalized under the grid quadrature. Densities whose
// mass is within 1e-6 of 1 are renormalized (file-format rounding); anything
// farther off is rejected.
class Distribution {
 public:
  static constexpr double kNormalizationTol = 1e-10;
  static constexpr double kRenormalizeTol = 1e-6;

  Distribution(SupportGrid grid, Eigen::ArrayXd density)
      : grid_(std::move(grid)), density_(std::move(density)) {
    if (density_.size() != grid_.size()) {
      throw DimensionError("Distribution: density length " +
                           std::to_string(density_.size()) +
                           " vs grid size " + std::to_string(grid_.size()));
    }
    for (Eigen::Index i = 0; i < density_.size(); ++i) {
      if (!std::isfinite(density_[i]) || density_[i] < 0.0) {
        throw InvalidDistribution(
            "Distribution: density must be finite and nonnegative (index " +
            std::to_string(i) + ")");
      }
    }
    const double mass = integrate(density_, grid_);
    if (std::abs(mass - 1.0) > kRenormalizeTol) {
      throw InvalidDistribution("Distribution: mass " + std::to_string(mass) +
                                " too far from 1");
    }
    if (std::abs(mass - 1.0) > kNormalizationTol) {
      density_ /= mass;
    }
  }

  const SupportGrid& grid() const noexcept { return grid_; }
  const Eigen::ArrayXd& density() const noexcept { return density_; }
  Eigen::Index size() const noexcept { return density_.size(); }

 private:
  SupportGrid grid_;
  Eigen::ArrayXd density_;
};

// Constant density 1/W where W is the total grid weight.
inline Distribution uniform_on(const SupportGrid& grid) {
  const double w = grid.total_weight();
  return Distribution(grid,
                      Eigen::ArrayXd::Constant(grid.size(), 1.0 / w));
}

// Samples of one moment function u_m on the grid.
struct MomentFunction {
  Eigen::ArrayXd values;
  std::string label;
};

enum class ConstraintKind { QExpectation, NormalizedQExpectation };

// Moment functions with their target values under one of the two
// expectation functionals. M = 0 is a valid, unconstrained set.
class ConstraintSet {
 public:
  ConstraintSet() = default;

  ConstraintSet(std::vector<MomentFunction> functions, Eigen::VectorXd targets,
                ConstraintKind kind)
      : functions_(std::move(functions)),
        targets_(std::move(targets)),
        kind_(kind) {
    if (static_cast<Eigen::Index>(functions_.size()) != targets_.size()) {
      throw DimensionError("ConstraintSet: " +
                           std::to_string(functions_.size()) +
                           " functions vs " + std::to_string(targets_.size()) +
                           " targets");
    }
    for (std::size_t m = 1; m < functions_.size(); ++m) {
      if (functions_[m].values.size() != functions_[0].values.size()) {
        throw DimensionError(
            "ConstraintSet: moment functions of unequal length");
      }
    }
  }

  Eigen::Index count() const noexcept {
    return static_cast<Eigen::Index>(functions_.size());
  }
  const std::vector<MomentFunction>& functions() const noexcept {
    return functions_;
  }
  const Eigen::VectorXd& targets() const noexcept { return targets_; }
  ConstraintKind kind() const noexcept { return kind_; }

  // n x M matrix with u_m sampled down column m.
  Eigen::MatrixXd function_matrix(const SupportGrid& grid) const {
    Eigen::MatrixXd u(grid.size(), count());
    for (Eigen::Index m = 0; m < count(); ++m) {
      if (functions_[m].values.size() != grid.size()) {
        throw DimensionError("ConstraintSet: function '" +
                             functions_[m].label + "' has length " +
                             std::to_string(functions_[m].values.size()) +
                             " on a grid of size " +
                             std::to_string(grid.size()));
      }
      u.col(m) = functions_[m].values.matrix();
    }
    return u;
  }

  // Same functions and kind, different targets.
  ConstraintSet with_targets(Eigen::VectorXd targets) const {
    return ConstraintSet(functions_, std::move(targets), kind_);
  }

 private:
  std::vector<MomentFunction> functions_;
  Eigen::VectorXd targets_;
  ConstraintKind kind_ = ConstraintKind::QExpectation;
};

// Integral of u p^q (the plain expectation on the classical branch).
inline double q_expectation(const Distribution& p, const MomentFunction& u,
                            const QIndex& q) {
  if (q.classical()) return integrate(u.values * p.density(), p.grid());
  return integrate(u.values * p.density().pow(q.value()), p.grid());
}

// Integral of u p^q over the integral of p^q (escort moment).
inline double normalized_q_expectation(const Distribution& p,
                                       const MomentFunction& u,
                                       const QIndex& q) {
  if (q.classical()) return integrate(u.values * p.density(), p.grid());
  const Eigen::ArrayXd pq = p.density().pow(q.value());
  const double denom = integrate(pq, p.grid());
  if (!(denom > 0.0)) {
    throw DomainError("normalized_q_expectation: integral of p^q vanishes");
  }
  return integrate(u.values * pq, p.grid()) / denom;
}

// true iff p puts mass only where r does.
inline bool absolutely_continuous(const Distribution& p,
                                  const Distribution& r) {
  if (!same_grid(p.grid(), r.grid())) {
    throw DimensionError("absolutely_continuous: distributions on different grids");
  }
  return ((p.density() <= 0.0) || (r.density() > 0.0)).all();
}

}  // namespace nxent
