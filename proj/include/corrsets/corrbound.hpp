#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "corrsets/disturbance.hpp"
#include "corrsets/lmi.hpp"
#include "corrsets/model.hpp"
#include "corrsets/symmat.hpp"

namespace corrsets {

enum class BoundRoute { prop1, cor1 };

const char* to_string(BoundRoute r);

// A correlation bound Gw together with the certificate that produced it. Gw
// dominates A E[z_k w_k^T] + E[w_k z_k^T] A^T + E[w_k w_k^T] for the
// recursion z_{k+1} = A z_k + w_k, z_0 = 0.
//
// prop1 route: Gw = coefficient * Gamma_tilde with
//   coefficient = alpha*phi*eta/(p-eta) + beta*phi*gamma*eta/(p-gamma*eta) + p/(1-p) + 1.
// cor1 route:  Gw = (alpha*eta/(p-eta) + beta*gamma*eta/(p-gamma*eta)) * S
//                 + (p/(1-p) + 1) * Gamma_tilde.
struct CorrelationBound {
  SymMatrix gw;
  double eta = 0.0;
  double phi = 1.0;
  double p = 0.0;
  SymMatrix s;
  double coefficient = 0.0;  // scalar multiplying Gamma_tilde in the prop1 form
  BoundRoute route = BoundRoute::prop1;
};

struct POptResult {
  double p = 0.0;
  double cost = 0.0;
};

// Minimizer of h(p) = alpha*phi*eta/(p-eta) + beta*phi*gamma*eta/(p-gamma*eta)
// + p/(1-p) over (max(eta, gamma*eta), 1); h is strictly convex there, so a
// golden-section search suffices. cost excludes the trailing +1.
POptResult optimal_p(double alpha, double beta, double gamma, double eta, double phi);

// Uniform grid of `points` values on [rho(A)^2, 0.999].
std::vector<double> default_eta_grid(const Eigen::MatrixXd& a, int points = 60);

// Grid eta, solve min_phi and the scalar p problem per point, keep the
// smallest coefficient; Gw = coefficient * Gamma_tilde.
CorrelationBound compute_bound_prop1(const CorrelationModel& model,
                                     const std::vector<double>& eta_grid, int jobs = 1);

// Grid eta, jointly optimize p (scalar search) and S (trace-minimal subject
// to A S A^T <= eta S, Gamma_tilde <= S); keep the minimal-trace Gw.
CorrelationBound compute_bound_cor1(const CorrelationModel& model,
                                    const std::vector<double>& eta_grid, int jobs = 1);

// Monte Carlo check of the defining inequality with sample means over
// independent trajectories. excess[k] is the top eigenvalue of
// (sample LHS at step k) - Gw; slack[k] the 3-sigma width of its estimate.
struct BoundVerification {
  std::vector<double> excess;
  std::vector<double> slack;
  bool pass = false;
};

BoundVerification verify_bound_empirically(const CorrelationBound& bound,
                                           const Eigen::MatrixXd& a,
                                           const GeneratorConfig& generator, int horizon,
                                           int trials, int jobs = 1);

}  // namespace corrsets
