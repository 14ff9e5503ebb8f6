#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "corrsets/errors.hpp"
#include "corrsets/symmat.hpp"
#include "test_util.hpp"

using namespace corrsets;
using testutil::gammaTilde1;
using testutil::sysA;

TEST_CASE("construction symmetrizes and rejects bad shapes") {
  SymMatrix s(Eigen::MatrixXd{{1.0, 2.0}, {0.0, 3.0}});
  CHECK(s(0, 1) == s(1, 0));
  CHECK(s(0, 1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(SymMatrix(Eigen::MatrixXd::Zero(2, 3)), ConfigError);
  CHECK_THROWS_AS(SymMatrix(Eigen::MatrixXd::Zero(0, 0)), ConfigError);
}

TEST_CASE("psd_leq basic order") {
  const SymMatrix zero = SymMatrix::zero(2);
  const SymMatrix id = SymMatrix::identity(2);
  CHECK(psd_leq(zero, id, 0.0));
  CHECK_FALSE(psd_leq(id, zero, 0.0));
  CHECK_THROWS_AS(psd_leq(zero, SymMatrix::identity(3), 0.0), ConfigError);
}

TEST_CASE("psd_leq on the case-study covariance: A Gt A^T <= 0.676 Gt") {
  const SymMatrix gt = gammaTilde1();
  const Eigen::MatrixXd a = sysA();
  const SymMatrix lhs(a * gt.m() * a.transpose());
  CHECK(psd_leq(lhs, gt.scaled(0.676), 0.0));
}

TEST_CASE("psd_leq is reflexive and transitive on random psd triples") {
  for (std::uint64_t id = 0; id < 25; ++id) {
    const int n = 2 + static_cast<int>(id % 3);
    const SymMatrix x = testutil::random_psd(n, 100 + id);
    CHECK(psd_leq(x, x, 0.0));
    const SymMatrix p = testutil::random_psd(n, 200 + id);
    const SymMatrix q = testutil::random_psd(n, 300 + id);
    const SymMatrix y(x.m() + p.m());
    const SymMatrix z(y.m() + q.m());
    const double tol = default_psd_tol(x, z);
    CHECK(psd_leq(x, y, tol));
    CHECK(psd_leq(y, z, tol));
    CHECK(psd_leq(x, z, tol));
  }
}

TEST_CASE("spectral_radius of triangular and zero matrices") {
  CHECK(spectral_radius(sysA()) == doctest::Approx(0.3));
  CHECK(spectral_radius(Eigen::MatrixXd::Zero(3, 3)) == doctest::Approx(0.0));
  CHECK(spectral_radius(testutil::filterH()) == doctest::Approx(0.75));
}

TEST_CASE("dlyap with M = 0 returns Q") {
  const SymMatrix q = testutil::random_psd(3, 7);
  const SymMatrix x = dlyap(Eigen::MatrixXd::Zero(3, 3), q);
  CHECK((x.m() - q.m()).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("dlyap reproduces the shaping-filter covariance") {
  const Eigen::MatrixXd h = testutil::filterH();
  const Eigen::MatrixXd fuf =
      testutil::filterF() * testutil::filterU().m() * testutil::filterF().transpose();
  const SymMatrix x = dlyap(h, SymMatrix(fuf));
  CHECK(x(0, 0) == doctest::Approx(7.8381).epsilon(1e-3));
  CHECK(x(0, 1) == doctest::Approx(-2.3983).epsilon(1e-3));
  CHECK(x(1, 1) == doctest::Approx(4.2422).epsilon(1e-3));
}

TEST_CASE("dlyap reproduces the invariant shape from the reference bound") {
  const SymMatrix w = dlyap(sysA(), testutil::gw1Reference());
  CHECK(w(0, 0) == doctest::Approx(20.8211).epsilon(1e-3));
  CHECK(w(0, 1) == doctest::Approx(-5.8942).epsilon(1e-3));
  CHECK(w(1, 1) == doctest::Approx(11.4496).epsilon(1e-3));
}

TEST_CASE("dlyap rejects unstable recursions") {
  CHECK_THROWS_AS(dlyap(Eigen::MatrixXd::Identity(2, 2), SymMatrix::identity(2)),
                  NumericalError);
}

TEST_CASE("dlyap equals the truncated series") {
  for (std::uint64_t id = 0; id < 10; ++id) {
    const int n = 2 + static_cast<int>(id % 3);
    const Eigen::MatrixXd m = testutil::random_stable(n, 400 + id, 0.6);
    const SymMatrix q = testutil::random_psd(n, 500 + id);
    const SymMatrix x = dlyap(m, q);

    const double rho = spectral_radius(m);
    int big_k = 8;
    while (std::pow(rho, 2 * big_k) >= 1e-12) ++big_k;
    Eigen::MatrixXd series = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd mi = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i <= big_k; ++i) {
      series += mi * q.m() * mi.transpose();
      mi = m * mi;
    }
    CHECK((x.m() - series).norm() <= 1e-8 * (1.0 + x.norm()));
  }
}

TEST_CASE("max_gen_eig identities and case-study values") {
  const SymMatrix w = testutil::random_psd(3, 42, 0.5);
  CHECK(max_gen_eig(w, w).lambda_max == doctest::Approx(1.0));

  const SymMatrix gt = gammaTilde1();
  const Eigen::MatrixXd h = testutil::filterH();
  const double gamma = max_gen_eig(SymMatrix(h * gt.m() * h.transpose()), gt).lambda_max;
  CHECK(gamma == doctest::Approx(0.676).epsilon(1e-3));

  const SymMatrix w1 = dlyap(sysA(), testutil::gw1Reference());
  const double lambda =
      max_gen_eig(SymMatrix(sysA() * w1.m() * sysA().transpose()), w1).lambda_max;
  CHECK(lambda == doctest::Approx(0.1221).epsilon(1e-3));
}

TEST_CASE("max_gen_eig certificate satisfies M v = lambda W v") {
  for (std::uint64_t id = 0; id < 10; ++id) {
    const int n = 2 + static_cast<int>(id % 4);
    const SymMatrix m = testutil::random_psd(n, 600 + id);
    const SymMatrix w = testutil::random_psd(n, 700 + id, 0.5);
    const GenEigResult r = max_gen_eig(m, w);
    const Eigen::VectorXd residual =
        m.m() * r.certificate_vector - r.lambda_max * w.m() * r.certificate_vector;
    CHECK(residual.norm() <= 1e-8 * (1.0 + m.norm()) * r.certificate_vector.norm());
  }
}

TEST_CASE("max_gen_eig agrees with bisection on the Loewner order") {
  for (std::uint64_t id = 0; id < 8; ++id) {
    const int n = 2 + static_cast<int>(id % 3);
    const SymMatrix m = testutil::random_psd(n, 800 + id);
    const SymMatrix w = testutil::random_psd(n, 900 + id, 0.5);
    const double direct = max_gen_eig(m, w).lambda_max;

    double lo = 0.0, hi = 1.0;
    while (!psd_leq(m, SymMatrix(hi * w.m()), 1e-9)) hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (psd_leq(m, SymMatrix(mid * w.m()), 1e-9) ? hi : lo) = mid;
    }
    CHECK(direct == doctest::Approx(hi).epsilon(1e-6));
  }
}

TEST_CASE("max_gen_eig rejects singular W") {
  CHECK_THROWS_AS(max_gen_eig(SymMatrix::identity(2), SymMatrix::zero(2)), NumericalError);
}

TEST_CASE("sqrt_psd on identity and diagonal matrices") {
  const SymMatrix id = SymMatrix::identity(3);
  CHECK((sqrt_psd(id).m() - id.m()).norm() == doctest::Approx(0.0).epsilon(1e-14));
  const SymMatrix d = SymMatrix::diag(Eigen::Vector2d{4.0, 9.0});
  const SymMatrix r = sqrt_psd(d);
  CHECK(r(0, 0) == doctest::Approx(2.0));
  CHECK(r(1, 1) == doctest::Approx(3.0));
  CHECK(r(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("sqrt_psd squares back to the case-study covariance") {
  const SymMatrix gt = gammaTilde1();
  const SymMatrix r = sqrt_psd(gt);
  CHECK((r.m() * r.m() - gt.m()).norm() <= 1e-10 * gt.norm());
}

TEST_CASE("sqrt_psd scales as sqrt(c^2 X) = c sqrt(X)") {
  for (std::uint64_t id = 0; id < 8; ++id) {
    const SymMatrix x = testutil::random_psd(3, 1000 + id);
    const double c = 0.5 + 0.25 * static_cast<double>(id);
    const SymMatrix lhs = sqrt_psd(SymMatrix(c * c * x.m()));
    const SymMatrix rhs = sqrt_psd(x);
    CHECK((lhs.m() - c * rhs.m()).norm() <= 1e-9 * (1.0 + lhs.norm()));
  }
}

TEST_CASE("sqrt_psd rejects indefinite input") {
  CHECK_THROWS_AS(sqrt_psd(SymMatrix(Eigen::MatrixXd{{1.0, 0.0}, {0.0, -1.0}})),
                  NumericalError);
}
