#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "corrsets/errors.hpp"
#include "corrsets/experiment.hpp"
#include "corrsets/invariance.hpp"
#include "corrsets/probsets.hpp"
#include "test_util.hpp"

using namespace corrsets;
using testutil::sysA;

TEST_CASE("synth_invariant: A = 0 gives W = Gw with lambda = 0") {
  const SymMatrix gw = testutil::random_psd(2, 10, 0.3);
  const InvariantEllipsoid inv = synth_invariant(Eigen::MatrixXd::Zero(2, 2), gw);
  CHECK((inv.w.m() - gw.m()).norm() <= 1e-12);
  CHECK(inv.lambda == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(inv.construction == InvariantConstruction::lyapunov_equality);
}

TEST_CASE("synth_invariant reproduces both case-study invariant sets") {
  SUBCASE("decaying-correlation regime") {
    const InvariantEllipsoid inv = synth_invariant(sysA(), testutil::gw1Reference());
    CHECK(inv.w(0, 0) == doctest::Approx(20.8211).epsilon(1e-3));
    CHECK(inv.w(0, 1) == doctest::Approx(-5.8942).epsilon(1e-3));
    CHECK(inv.w(1, 1) == doctest::Approx(11.4496).epsilon(1e-3));
    CHECK(inv.lambda == doctest::Approx(0.1221).epsilon(1e-3));
  }
  SUBCASE("constant-disturbance regime") {
    const InvariantEllipsoid inv = synth_invariant(sysA(), testutil::gw2Reference());
    CHECK(inv.w(0, 0) == doctest::Approx(1.2669).epsilon(1e-3));
    CHECK(inv.w(0, 1) == doctest::Approx(-1.9125).epsilon(1e-3));
    CHECK(inv.w(1, 1) == doctest::Approx(4.0380).epsilon(1e-3));
    CHECK(inv.lambda == doctest::Approx(0.0921).epsilon(1e-3));
  }
}

TEST_CASE("synth_invariant output satisfies the one-step equality") {
  for (std::uint64_t id = 0; id < 8; ++id) {
    const int n = 2 + static_cast<int>(id % 3);
    const Eigen::MatrixXd a = testutil::random_stable(n, 500 + id, 0.75);
    const SymMatrix gw = testutil::random_psd(n, 600 + id, 0.3);
    const InvariantEllipsoid inv = synth_invariant(a, gw);
    const double residual = (inv.w.m() - a * inv.w.m() * a.transpose() - gw.m()).norm();
    CHECK(residual <= 1e-9 * (1.0 + inv.w.norm()));
    CHECK(psd_leq(SymMatrix(a * inv.w.m() * a.transpose() + gw.m()), inv.w, 1e-7));
    CHECK(psd_leq(SymMatrix(a * inv.w.m() * a.transpose()),
                  SymMatrix(inv.lambda * inv.w.m()), 1e-9));
    CHECK(inv.lambda >= 0.0);
    CHECK(inv.lambda < 1.0);
  }
}

TEST_CASE("level_for_violation closed forms") {
  CHECK(level_for_violation({2, 0.1, LevelDistribution::gaussian, false}, 0.0) ==
        doctest::Approx(4.60517018598809).epsilon(1e-9));
  CHECK(level_for_violation({2, 0.1, LevelDistribution::gaussian, false}, 0.1221) ==
        doctest::Approx(4.60517018598809 / 0.8779).epsilon(1e-9));
  CHECK(level_for_violation({2, 0.2, LevelDistribution::chebyshev, false}, 0.5) ==
        doctest::Approx(20.0));
  CHECK_THROWS_AS(level_for_violation({2, 0.1, LevelDistribution::gaussian, false}, 1.0),
                  ConfigError);
}

TEST_CASE("level_for_violation is monotone and conservative mode inflates") {
  double prev = std::numeric_limits<double>::infinity();
  for (double pv : {0.1, 0.2, 0.3, 0.4, 0.5}) {
    const double rho = level_for_violation({2, pv, LevelDistribution::gaussian, false}, 0.3);
    CHECK(rho < prev);
    prev = rho;
  }
  prev = 0.0;
  for (double lambda : {0.0, 0.2, 0.4, 0.6, 0.8}) {
    const double rho =
        level_for_violation({2, 0.1, LevelDistribution::chebyshev, false}, lambda);
    CHECK(rho > prev);
    prev = rho;
  }
  const double base = level_for_violation({2, 0.1, LevelDistribution::gaussian, false}, 0.3);
  const double cons = level_for_violation({2, 0.1, LevelDistribution::gaussian, true}, 0.3);
  CHECK(cons > base);
  CHECK(cons * std::pow(1.0 - std::sqrt(0.3), 2) ==
        doctest::Approx(base * (1.0 - 0.3)).epsilon(1e-12));
}

TEST_CASE("synth_invariant_robust: A = 0 returns the grid minimum") {
  const SymMatrix gw = testutil::random_psd(2, 20, 0.4);
  const double r = 3.0;
  const InvariantEllipsoid inv = synth_invariant_robust(Eigen::MatrixXd::Zero(2, 2), gw, r);
  CHECK(inv.construction == InvariantConstruction::robust_sproc);
  // W(s) = (1+s) r Gw, minimized at the smallest grid multiplier s = 1e-3.
  CHECK(inv.w.trace() == doctest::Approx(1.001 * r * gw.trace()).epsilon(1e-6));
}

TEST_CASE("synth_invariant_robust outputs with r >= 1 satisfy the one-step inequality") {
  for (std::uint64_t id = 0; id < 10; ++id) {
    const Eigen::MatrixXd a = testutil::random_stable(2, 700 + id, 0.6);
    const SymMatrix gw = testutil::random_psd(2, 800 + id, 0.3);
    const double r = 1.0 + static_cast<double>(id % 4);
    const InvariantEllipsoid inv = synth_invariant_robust(a, gw, r);
    CHECK(psd_leq(SymMatrix(a * inv.w.m() * a.transpose() + gw.m()), inv.w, 1e-7));
    CHECK(inv.lambda < 1.0);
  }
}

TEST_CASE("robust construction is more conservative than the scaled equality solution") {
  const Eigen::MatrixXd a = sysA();
  const SymMatrix gw = testutil::gw1Reference();
  const double p_v = 0.1;
  const double r = chebyshev_level(2, p_v);
  const InvariantEllipsoid robust = synth_invariant_robust(a, gw, r);
  const InvariantEllipsoid lyap = synth_invariant(a, gw);
  // B(W_robust, 1) carries violation n/r = p_v; the equality route reaches the
  // same guarantee with level rho, i.e. the shape rho * W.
  const double rho =
      level_for_violation({2, p_v, LevelDistribution::chebyshev, false}, lyap.lambda);
  CHECK(robust.w.trace() >= rho * lyap.w.trace());
}

TEST_CASE("synth_invariant_robust reports an impossible contraction") {
  // rho(A)^2 = 0.81: (1 + 1/s) rho^2 < 1 needs s > 4.26, and the inflation
  // (1+s) r Gw then overwhelms any W for large r with a near-unit A.
  const Eigen::MatrixXd a = 0.9 * Eigen::MatrixXd::Identity(2, 2);
  const SymMatrix gw = SymMatrix::identity(2);
  // Feasible at moderate r (construction always exists for rho < 1), so check
  // the hard precondition instead.
  CHECK_THROWS_AS(synth_invariant_robust(Eigen::MatrixXd::Identity(2, 2), gw, 1.0),
                  ConfigError);
  const InvariantEllipsoid inv = synth_invariant_robust(a, gw, 1.0);
  CHECK(inv.lambda < 1.0);
}

TEST_CASE("check_prop5 cases") {
  const Eigen::MatrixXd a = sysA();
  const SymMatrix gw = testutil::gw1Reference();
  SUBCASE("vacuous when the premise is infeasible") {
    CHECK(check_prop5(a, gw, SymMatrix::identity(2), 1.0));
  }
  SUBCASE("holds on the robust construction at r = 1") {
    const InvariantEllipsoid inv = synth_invariant_robust(a, gw, 1.0);
    CHECK(check_prop5(a, gw, inv.w, 1.0));
  }
  SUBCASE("r < 1 is a precondition error") {
    CHECK_THROWS_AS(check_prop5(a, gw, SymMatrix::identity(2), 0.5), ConfigError);
  }
}

TEST_CASE("check_prop5 holds on 200 random robust-feasible instances") {
  int feasible = 0;
  for (std::uint64_t id = 0; id < 200; ++id) {
    const Eigen::MatrixXd a = testutil::random_stable(2, 1000 + id,
                                                      0.15 + 0.004 * double(id));
    const SymMatrix gw = testutil::random_psd(2, 2000 + id, 0.2);
    const double r = 1.0 + static_cast<double>(id % 3);
    const InvariantEllipsoid inv = synth_invariant_robust(a, gw, r);
    if (ellipsoid_sum_inclusion(a, inv.w, gw, r, default_s_grid()).status ==
        SdpStatus::optimal)
      ++feasible;
    CHECK(check_prop5(a, gw, inv.w, r));
  }
  CHECK(feasible == 200);  // the multiplier family is feasible by construction
}

TEST_CASE("noise-free iterates decay along lambda^k") {
  const Eigen::MatrixXd a = sysA();
  const InvariantEllipsoid inv = synth_invariant(a, testutil::gw1Reference());
  const double rho = level_for_violation({2, 0.1, LevelDistribution::gaussian, false},
                                         inv.lambda);
  const Eigen::MatrixXd w_inv = inv.w.m().inverse();
  const rng::StreamKey key{3, rng::kTesting, 77};
  for (const auto& x0 : sample_boundary(inv.w, rho, 50, key)) {
    Eigen::VectorXd x = x0;
    double level = rho;
    for (int k = 0; k < 25; ++k) {
      x = a * x;
      level *= inv.lambda;
      CHECK(x.dot(w_inv * x) <= level * (1.0 + 1e-9) + 1e-12);
    }
  }
}
