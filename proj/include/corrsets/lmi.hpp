#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "corrsets/model.hpp"
#include "corrsets/symmat.hpp"

namespace corrsets {

enum class SdpStatus { optimal, infeasible, numerical_failure };

const char* to_string(SdpStatus s);

// Result of one of the small matrix-inequality programs below. When status
// is optimal, (S, scalars) re-verifies against the posed constraints within
// an absolute eigenvalue tolerance of 1e-7.
struct SdpCertificate {
  SdpStatus status = SdpStatus::numerical_failure;
  double objective = std::numeric_limits<double>::quiet_NaN();
  SymMatrix S;
  std::map<std::string, double> scalars;
};

// ---------------------------------------------------------------------------
// Generic small-scale SDP engine.
//
// Problems are stated as   min c^T x   s.t.  G_b(x) = G_b0 + sum_i x_i G_bi >= 0
// over a handful of scalar variables (a vectorized symmetric matrix plus the
// odd extra scalar). Solved by log-det barrier path following: phase I
// maximizes the feasibility margin through a slack variable, phase II tracks
// the central path with damped Newton steps. Intended for n <= ~10 matrix
// blocks; accuracy is limited by the final barrier gap (~1e-10 * block size).
// ---------------------------------------------------------------------------

struct LmiBlock {
  Eigen::MatrixXd g0;
  std::vector<Eigen::MatrixXd> gi;  // one coefficient matrix per variable
};

struct SdpProblem {
  Eigen::VectorXd cost;
  std::vector<LmiBlock> blocks;
  int nvar() const { return static_cast<int>(cost.size()); }
};

struct SdpOptions {
  double gap_tol = 1e-10;      // relative duality-gap target
  double feas_margin = 1e-9;   // minimum eigenvalue margin counted as feasible
  double mu = 20.0;            // barrier parameter growth factor
  int max_newton = 2000;       // total Newton iterations across both phases
};

struct SdpSolution {
  SdpStatus status = SdpStatus::numerical_failure;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  double margin = 0.0;  // min eigenvalue over blocks at x
};

SdpSolution solve_small_sdp(const SdpProblem& problem, const SdpOptions& options = {});

// Orthonormal basis of n x n symmetric matrices (diagonal units first, then
// off-diagonal pairs scaled by 1/sqrt(2)); shared by the solvers and tests.
std::vector<Eigen::MatrixXd> sym_basis(int n);

// ---------------------------------------------------------------------------
// The three programs used by the correlation-bound and invariance pipelines.
// ---------------------------------------------------------------------------

// min phi  s.t.  Gamma_tilde <= S <= phi * Gamma_tilde,  A S A^T <= eta * S.
// Requires eta in [rho(A)^2, 1). scalars: {"phi", "eta"}.
SdpCertificate min_phi(const Eigen::MatrixXd& a, const SymMatrix& gamma_tilde, double eta);

// min trace(Gw(S)) with Gw(S) = (alpha*eta/(p-eta) + beta*gamma*eta/(p-gamma*eta)) * S
//                             + (p/(1-p) + 1) * Gamma_tilde
// s.t. A S A^T <= eta * S, Gamma_tilde <= S. objective = trace(Gw(S*)).
// scalars: {"eta","p","s_coefficient","gamma_coefficient"}.
SdpCertificate min_trace_corrbound(const CorrelationModel& model, double eta, double p);

// Sufficient certificate for A*B(W,1) + B(Gw,r) <= B(W,1): some s in s_grid
// with (1 + 1/s) A W A^T + (1 + s) r Gw <= W. scalars: {"s","margin"}; S holds
// the outer-ellipsoid shape at the witnessing s.
SdpCertificate ellipsoid_sum_inclusion(const Eigen::MatrixXd& a, const SymMatrix& w,
                                       const SymMatrix& gw, double r,
                                       const std::vector<double>& s_grid);

// 200 log-uniform points on [1e-3, 1e3].
std::vector<double> default_s_grid();

}  // namespace corrsets
