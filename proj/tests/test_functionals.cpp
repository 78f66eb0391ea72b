#include <cmath>
#include <random>

#include <doctest.h>

#include "nxent/functionals.hpp"
#include "support/oracles.hpp"
#include "support/random_instances.hpp"

using namespace nxent;

namespace {

Distribution make_discrete(std::initializer_list<double> dens) {
  Eigen::ArrayXd d(static_cast<Eigen::Index>(dens.size()));
  Eigen::Index i = 0;
  for (double v : dens) d[i++] = v;
  return Distribution(SupportGrid::discrete(d.size()), d);
}

// Independent product system: flattened grid with weights w1_i w2_j and
// density p1_i p2_j.
Distribution product_distribution(const Distribution& a,
                                  const Distribution& b) {
  const Eigen::Index n = a.size() * b.size();
  Eigen::ArrayXd w(n), d(n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    for (Eigen::Index j = 0; j < b.size(); ++j, ++k) {
      w[k] = a.grid().weights()[i] * b.grid().weights()[j];
      d[k] = a.density()[i] * b.density()[j];
    }
  }
  return Distribution(
      SupportGrid(Eigen::ArrayXd::LinSpaced(n, 0.0, double(n - 1)), w), d);
}

}  // namespace

TEST_CASE("tsallis_entropy on pinned values") {
  CHECK(tsallis_entropy(make_discrete({1.0, 0.0}), QIndex{2.0}) == 0.0);
  CHECK(tsallis_entropy(make_discrete({1.0, 0.0}), QIndex{0.5}) == 0.0);
  CHECK(tsallis_entropy(make_discrete({0.5, 0.5}), QIndex{2.0}) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(tsallis_entropy(make_discrete({0.5, 0.5}), QIndex{1.0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("tsallis_relative_entropy on pinned values") {
  const Distribution p = make_discrete({0.5, 0.5});
  const Distribution r = make_discrete({0.25, 0.75});
  CHECK(tsallis_relative_entropy(p, p, QIndex{2.0}) == 0.0);
  CHECK(tsallis_relative_entropy(p, p, QIndex{0.5}) == 0.0);
  CHECK(tsallis_relative_entropy(p, r, QIndex{2.0}) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(tsallis_relative_entropy(p, r, QIndex{1.0}) ==
        doctest::Approx(0.5 * std::log(4.0 / 3.0)).epsilon(1e-14));

  const Distribution point = make_discrete({1.0, 0.0});
  CHECK_THROWS_AS(tsallis_relative_entropy(p, point, QIndex{2.0}),
                  AbsoluteContinuityError);
  // mass of p outside support(r) is rejected even on the classical branch
  CHECK_THROWS_AS(tsallis_relative_entropy(p, point, QIndex{1.0}),
                  AbsoluteContinuityError);
}

TEST_CASE("entropy_divergence_link vanishes") {
  const Distribution h = make_discrete({0.5, 0.5});
  const Distribution s = make_discrete({0.7, 0.3});
  const Distribution r = make_discrete({0.25, 0.75});
  CHECK(std::abs(entropy_divergence_link(h, h, QIndex{2.0})) < 1e-14);
  CHECK(tsallis_relative_entropy(s, h, QIndex{2.0}) ==
        doctest::Approx(0.16).epsilon(1e-14));
  CHECK(std::abs(entropy_divergence_link(s, h, QIndex{2.0})) < 1e-10);
  CHECK(std::abs(entropy_divergence_link(h, r, QIndex{0.5})) < 1e-10);
}

TEST_CASE("divergence sign law for q > 0, and the q = 0 limit") {
  testgen::Rng rng(11);
  for (double qv : {0.3, 0.5, 1.0, 1.5, 2.0, 2.7}) {
    for (int rep = 0; rep < 40; ++rep) {
      const SupportGrid g = testgen::random_grid(rng, 3, rep % 2 == 0);
      const Distribution p = testgen::random_distribution(rng, g);
      const Distribution r = testgen::random_distribution(rng, g);
      const double d = tsallis_relative_entropy(p, r, QIndex{qv});
      const bool same = (p.density() - r.density()).abs().maxCoeff() < 1e-12;
      if (!same) CHECK(d > 0.0);
      // at q = 0 the divergence degenerates to Int (p - r) = 0; the library
      // rejects q <= 0, so the limit is checked on the defining formula
      CHECK(std::abs(oracle::divergence(p.density(), r.density(),
                                        g.weights(), 0.0)) < 1e-12);
    }
  }
  CHECK_THROWS_AS(QIndex{0.0}, DomainError);
}

TEST_CASE("pseudo-additivity over independent products") {
  testgen::Rng rng(12);
  for (double qv : {0.5, 2.0}) {
    const QIndex q{qv};
    for (int rep = 0; rep < 60; ++rep) {
      const SupportGrid g1 = testgen::random_grid(rng, 2 + rep % 2);
      const SupportGrid g2 = testgen::random_grid(rng, 2, true);
      const Distribution p1 = testgen::random_distribution(rng, g1);
      const Distribution p2 = testgen::random_distribution(rng, g2);
      const Distribution r1 = testgen::random_distribution(rng, g1);
      const Distribution r2 = testgen::random_distribution(rng, g2);
      const Distribution p12 = product_distribution(p1, p2);
      const Distribution r12 = product_distribution(r1, r2);

      const double i1 = tsallis_relative_entropy(p1, r1, q);
      const double i2 = tsallis_relative_entropy(p2, r2, q);
      const double i12 = tsallis_relative_entropy(p12, r12, q);
      CHECK(std::abs(i12 - pseudo_add(i1, i2, q, PseudoAddMode::Divergence)) <
            1e-10);

      const double s1 = tsallis_entropy(p1, q);
      const double s2 = tsallis_entropy(p2, q);
      const double s12 = tsallis_entropy(p12, q);
      CHECK(std::abs(s12 - pseudo_add(s1, s2, q, PseudoAddMode::Entropy)) <
            1e-10);
    }
  }
  // classical limit: plain additivity
  testgen::Rng rng2(13);
  const SupportGrid g1 = testgen::random_grid(rng2, 3);
  const SupportGrid g2 = testgen::random_grid(rng2, 2);
  const Distribution p1 = testgen::random_distribution(rng2, g1);
  const Distribution p2 = testgen::random_distribution(rng2, g2);
  const Distribution r1 = testgen::random_distribution(rng2, g1);
  const Distribution r2 = testgen::random_distribution(rng2, g2);
  const QIndex q1{1.0};
  CHECK(tsallis_relative_entropy(product_distribution(p1, p2),
                                 product_distribution(r1, r2), q1) ==
        doctest::Approx(tsallis_relative_entropy(p1, r1, q1) +
                        tsallis_relative_entropy(p2, r2, q1))
            .epsilon(1e-12));
}

TEST_CASE("uniform distribution maximizes S_q, with value ln_q W") {
  testgen::Rng rng(14);
  for (double qv : {0.5, 1.0, 2.0}) {
    const QIndex q{qv};
    for (int rep = 0; rep < 20; ++rep) {
      const SupportGrid g = testgen::random_grid(rng, 4, rep % 2 == 0);
      const double w = g.total_weight();
      const Distribution u = uniform_on(g);
      CHECK(tsallis_entropy(u, q) ==
            doctest::Approx(ln_q(w, q)).epsilon(1e-12));
      const Distribution p = testgen::random_distribution(rng, g, 0.02);
      CHECK(tsallis_entropy(p, q) <= tsallis_entropy(u, q) + 1e-12);
    }
  }
}

TEST_CASE("I_q is convex in its first argument for q > 0") {
  testgen::Rng rng(15);
  std::uniform_real_distribution<double> lam(0.0, 1.0);
  for (double qv : {0.5, 1.3, 2.0}) {
    const QIndex q{qv};
    for (int rep = 0; rep < 40; ++rep) {
      const SupportGrid g = testgen::random_grid(rng, 3);
      const Distribution p1 = testgen::random_distribution(rng, g);
      const Distribution p2 = testgen::random_distribution(rng, g);
      const Distribution r = testgen::random_distribution(rng, g);
      const double t = lam(rng);
      const Distribution mix(g, t * p1.density() + (1.0 - t) * p2.density());
      CHECK(tsallis_relative_entropy(mix, r, q) <=
            t * tsallis_relative_entropy(p1, r, q) +
                (1.0 - t) * tsallis_relative_entropy(p2, r, q) + 1e-12);
    }
  }
}

TEST_CASE("q -> 1 convergence of both functionals at rate O(|q-1|)") {
  const Distribution p = make_discrete({0.6, 0.3, 0.1});
  const Distribution r = make_discrete({0.2, 0.3, 0.5});
  const double s1 = tsallis_entropy(p, QIndex{1.0});
  const double i1 = tsallis_relative_entropy(p, r, QIndex{1.0});

  double prev_err_s = 1e9, prev_err_i = 1e9;
  for (int k = 3; k <= 7; ++k) {
    const double eps = std::pow(10.0, -k);
    double err_s = 0.0, err_i = 0.0;
    for (double sign : {-1.0, 1.0}) {
      const QIndex q{1.0 + sign * eps};
      err_s = std::max(err_s, std::abs(tsallis_entropy(p, q) - s1));
      err_i =
          std::max(err_i, std::abs(tsallis_relative_entropy(p, r, q) - i1));
    }
    // linear rate: one decade of q-distance buys about a decade of error
    CHECK(err_s <= 2.0 * eps);
    CHECK(err_i <= 2.0 * eps);
    CHECK(err_s <= prev_err_s);
    CHECK(err_i <= prev_err_i);
    prev_err_s = err_s;
    prev_err_i = err_i;
  }
}
