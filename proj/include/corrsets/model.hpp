#pragma once

#include <Eigen/Dense>

#include "corrsets/symmat.hpp"

namespace corrsets {

// System matrix plus the correlation envelope of the disturbance sequence:
// E[w_i w_j^T] * Gamma_tilde^{-1} * E[w_i w_j^T]^T <= (alpha + beta*gamma^(j-i)) * Gamma_tilde.
struct CorrelationModel {
  Eigen::MatrixXd a;
  SymMatrix gamma_tilde;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.5;
  // Opt-in extension for increasingly correlated sequences: gamma >= 1 is
  // admitted, and the scalar searches then require eta < 1/gamma. Off by
  // default; the standard envelope has gamma in (0, 1).
  bool allow_gamma_ge_one = false;

  // Throws ConfigError unless rho(a) < 1, gamma_tilde > 0, alpha/beta >= 0
  // and gamma in (0, 1) (or gamma > 0 with the extension enabled).
  void validate() const;

  int dim() const { return gamma_tilde.dim(); }
};

}  // namespace corrsets
