#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "corrsets/symmat.hpp"

namespace corrsets {

// Confidence ellipsoid B(Gamma, r) = { Gamma^{1/2} z : z^T z <= r }. For
// singular Gamma the set lives in range(Gamma^{1/2}); membership is tested in
// range-space coordinates.
struct Ellipsoid {
  SymMatrix gamma;
  double r = 0.0;
};

bool contains(const Ellipsoid& e, const Eigen::VectorXd& x, double tol);

// Sampling check of the outer Minkowski inclusion
//   B(A Gt A^T + Sigma, r)  subset of  A B(Gt, r) + B(Sigma, r):
// each sampled point is split into x = A Gt^{1/2} y + Sigma^{1/2} w with
//   y = Gt^{1/2} A^T M^{-1} x,  w = Sigma^{1/2} M^{-1} x,  M = A Gt A^T + Sigma,
// and y^T y <= r, w^T w <= r are asserted.
struct MinkowskiReport {
  int samples = 0;
  int violations = 0;
  double max_residual = 0.0;     // worst reconstruction error of the split
  double max_norm_excess = 0.0;  // worst of y^Ty - r and w^Tw - r
};

MinkowskiReport minkowski_outer_check(const Eigen::MatrixXd& a, const SymMatrix& gamma_tilde,
                                      const SymMatrix& sigma, double r, int samples,
                                      std::uint64_t seed = 0);

// Covariance tube Gamma_1 = Gw, Gamma_{k+1} = A Gamma_k A^T + Gw; the set
// B(Gamma_k, r) carries a per-step membership guarantee of 1 - n/r.
struct ReachTube {
  std::vector<SymMatrix> levels;  // Gamma_1 .. Gamma_K
  double r = 0.0;
  double violation_level = 0.0;  // n / r
};

ReachTube reach_tube(const Eigen::MatrixXd& a, const SymMatrix& gw, double r, int K);

// One row per step: k, r, then the flattened (row-major) entries of Gamma_k.
void write_tube_csv(const ReachTube& tube, std::ostream& os);

// Chebyshev level: membership probability >= 1 - epsilon at r = n / epsilon.
double chebyshev_level(int n, double epsilon);

// Chi-squared CDF/quantile with n degrees of freedom (regularized lower
// incomplete gamma; quantile by Newton with bisection safeguard).
double chi2_cdf(int n, double x);
double chi2_inv(int n, double q);

}  // namespace corrsets
