#pragma once

// Seeded generators for small random test instances. Densities get a floor
// bounded away from zero and moment functions stay in [-1, 1], which keeps
// random problems away from the Tsallis cut-off.

#include <random>
#include <vector>

#include <Eigen/Core>

#include "nxent/distribution.hpp"

namespace testgen {

using Rng = std::mt19937_64;

inline nxent::SupportGrid random_grid(Rng& rng, Eigen::Index n,
                                      bool weighted = false) {
  std::uniform_real_distribution<double> gap(0.3, 1.5);
  Eigen::ArrayXd pts(n);
  double x = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    pts[i] = x;
    x += gap(rng);
  }
  if (!weighted) return nxent::SupportGrid::discrete(pts);
  std::uniform_real_distribution<double> wgt(0.25, 2.0);
  Eigen::ArrayXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = wgt(rng);
  return nxent::SupportGrid(std::move(pts), std::move(w));
}

// Random density with mass floor at every point, normalized on the grid.
inline nxent::Distribution random_distribution(Rng& rng,
                                               const nxent::SupportGrid& grid,
                                               double floor = 0.1) {
  std::uniform_real_distribution<double> mass(floor, 1.0);
  Eigen::ArrayXd m(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) m[i] = mass(rng);
  m /= m.sum();
  return nxent::Distribution(grid, m / grid.weights());
}

inline nxent::MomentFunction random_moment(Rng& rng, Eigen::Index n,
                                           const std::string& label = "u") {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  Eigen::ArrayXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = val(rng);
  return nxent::MomentFunction{std::move(v), label};
}

// Moment function whose values span at least `spread`; keeps the multiplier
// scale of random instances moderate (near-constant functions need huge
// multipliers, which wrecks the conditioning of finite-difference checks).
inline nxent::MomentFunction spread_moment(Rng& rng, Eigen::Index n,
                                           const std::string& label = "u",
                                           double spread = 0.8) {
  for (;;) {
    nxent::MomentFunction m = random_moment(rng, n, label);
    if (m.values.maxCoeff() - m.values.minCoeff() >= spread) return m;
  }
}

// Random density drawn as a mixture toward `r`. Expectation matching treats
// the prior as an estimate of the unknown distribution; in that regime the
// matched targets stay strictly inside the reachable moment range. Far-apart
// pairs can push the self-consistent targets outside it, where no finite
// matching solution exists.
inline nxent::Distribution mixture_toward(Rng& rng,
                                          const nxent::Distribution& r,
                                          double lambda, double floor = 0.1) {
  const nxent::Distribution z = random_distribution(rng, r.grid(), floor);
  return nxent::Distribution(
      r.grid(), (1.0 - lambda) * r.density() + lambda * z.density());
}

}  // namespace testgen
