#pragma once

#include <Eigen/Dense>

#include "corrsets/errors.hpp"

namespace corrsets {

// Dense symmetric matrix. Symmetry is enforced on construction by averaging
// (X + X^T)/2 so that downstream eigenvalue-based order checks never see
// asymmetric round-off.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(Eigen::MatrixXd raw);

  static SymMatrix identity(int n);
  static SymMatrix zero(int n);
  static SymMatrix diag(const Eigen::VectorXd& d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& m() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }
  double norm() const { return m_.norm(); }

  SymMatrix scaled(double c) const { return SymMatrix(c * m_); }

 private:
  Eigen::MatrixXd m_;
};

// Pair (lambda_max, v) with M v = lambda_max W v.
struct GenEigResult {
  double lambda_max = 0.0;
  Eigen::VectorXd certificate_vector;
};

// Smallest eigenvalue of a symmetric matrix.
double min_eig(const SymMatrix& x);

// Loewner order: true iff min_eig(Y - X) >= -tol.
bool psd_leq(const SymMatrix& x, const SymMatrix& y, double tol);

// 1e-9 relative to the larger of the two norms (and at least 1e-9).
double default_psd_tol(const SymMatrix& x, const SymMatrix& y);

// Largest modulus among the (possibly complex) eigenvalues of m.
double spectral_radius(const Eigen::MatrixXd& m);

// Unique X = M X M^T + Q for rho(M) < 1, computed by fixed-point iteration
// with squaring of M. Residual is driven below 1e-12 * (1 + ||X||_F).
SymMatrix dlyap(const Eigen::MatrixXd& m, const SymMatrix& q);

// Smallest lambda with M <= lambda * W (W > 0), i.e. the top eigenvalue of
// W^{-1/2} M W^{-1/2}, together with a generalized eigenvector certificate.
GenEigResult max_gen_eig(const SymMatrix& m, const SymMatrix& w);

// R >= 0 with R R = X. Eigenvalues in [-1e-9*||X||, 0) are clamped to zero;
// anything more negative is rejected.
SymMatrix sqrt_psd(const SymMatrix& x);

}  // namespace corrsets
