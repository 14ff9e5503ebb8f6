#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corrsets/lmi.hpp"
#include "corrsets/symmat.hpp"

namespace corrsets {

enum class InvariantConstruction { lyapunov_equality, robust_sproc };

const char* to_string(InvariantConstruction c);

// Ellipsoid shape W > 0 with A W A^T + Gw <= W and contraction rate
// lambda = min{ l : A W A^T <= l W } in [0, 1).
struct InvariantEllipsoid {
  SymMatrix w;
  double lambda = 0.0;
  InvariantConstruction construction = InvariantConstruction::lyapunov_equality;
};

// W = dlyap(A, Gw): the equality solution A W A^T + Gw = W, minimal in the
// Loewner order among all solutions of the inequality.
InvariantEllipsoid synth_invariant(const Eigen::MatrixXd& a, const SymMatrix& gw);

enum class LevelDistribution { chebyshev, gaussian };

const char* to_string(LevelDistribution d);

struct ViolationSpec {
  int n = 0;
  double p_v = 0.0;
  LevelDistribution distribution = LevelDistribution::gaussian;
  bool conservative_mode = false;
};

// Level rho such that B(W, rho) has per-step violation probability <= p_v:
//   chebyshev: rho = n / ((1 - lambda) p_v)
//   gaussian:  rho = chi2_inv(n, 1 - p_v) / (1 - lambda)
// conservative_mode replaces (1 - lambda) by (1 - sqrt(lambda))^2, the exact
// Minkowski-difference level of concentric ellipsoids.
double level_for_violation(const ViolationSpec& spec, double lambda);

// Robust-style synthesis through the multiplier family: per grid point s with
// (1 + 1/s) rho(A)^2 < 1, W(s) = dlyap(sqrt(1 + 1/s) A, (1 + s) r Gw)
// satisfies (1 + 1/s) A W A^T + (1 + s) r Gw = W; the trace-minimal W is kept.
InvariantEllipsoid synth_invariant_robust(const Eigen::MatrixXd& a, const SymMatrix& gw,
                                          double r,
                                          const std::vector<double>& s_grid =
                                              default_s_grid());

// Truth of the implication (for r >= 1): if the multiplier certificate of
// ellipsoid_sum_inclusion holds for (A, W, Gw, r) then A W A^T + Gw <= W.
// Vacuously true when the certificate is infeasible.
bool check_prop5(const Eigen::MatrixXd& a, const SymMatrix& gw, const SymMatrix& w,
                 double r);

}  // namespace corrsets
