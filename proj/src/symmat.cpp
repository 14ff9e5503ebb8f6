#include "corrsets/symmat.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

namespace corrsets {

SymMatrix::SymMatrix(Eigen::MatrixXd raw) {
  if (raw.rows() == 0 || raw.rows() != raw.cols()) {
    throw ConfigError("SymMatrix requires a non-empty square matrix, got " +
                      std::to_string(raw.rows()) + "x" + std::to_string(raw.cols()));
  }
  m_ = 0.5 * (raw + raw.transpose()).eval();
}

SymMatrix SymMatrix::identity(int n) { return SymMatrix(Eigen::MatrixXd::Identity(n, n)); }

SymMatrix SymMatrix::zero(int n) { return SymMatrix(Eigen::MatrixXd::Zero(n, n)); }

SymMatrix SymMatrix::diag(const Eigen::VectorXd& d) {
  return SymMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

double min_eig(const SymMatrix& x) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.m(), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool psd_leq(const SymMatrix& x, const SymMatrix& y, double tol) {
  if (x.dim() != y.dim()) {
    throw ConfigError("psd_leq: dimension mismatch " + std::to_string(x.dim()) + " vs " +
                      std::to_string(y.dim()));
  }
  if (tol < 0) throw ConfigError("psd_leq: negative tolerance");
  return min_eig(SymMatrix(y.m() - x.m())) >= -tol;
}

double default_psd_tol(const SymMatrix& x, const SymMatrix& y) {
  return 1e-9 * std::max(1.0, std::max(x.norm(), y.norm()));
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw ConfigError("spectral_radius: matrix must be square");
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SymMatrix dlyap(const Eigen::MatrixXd& m, const SymMatrix& q) {
  if (m.rows() != m.cols() || m.rows() != q.dim()) {
    throw ConfigError("dlyap: dimension mismatch");
  }
  const double rho = spectral_radius(m);
  if (rho >= 1.0) {
    throw NumericalError("dlyap: spectral radius " + std::to_string(rho) +
                         " >= 1, recursion does not converge");
  }
  Eigen::MatrixXd x = q.m();
  Eigen::MatrixXd p = m;
  for (int it = 0; it < 64; ++it) {
    const Eigen::MatrixXd inc = p * x * p.transpose();
    x += inc;
    x = 0.5 * (x + x.transpose()).eval();
    if (inc.norm() <= 1e-15 * (1.0 + x.norm())) break;
    p = (p * p).eval();
  }
  const double residual = (m * x * m.transpose() + q.m() - x).norm();
  if (residual > 1e-12 * (1.0 + x.norm())) {
    throw NumericalError("dlyap: residual " + std::to_string(residual) + " above tolerance");
  }
  return SymMatrix(x);
}

GenEigResult max_gen_eig(const SymMatrix& m, const SymMatrix& w) {
  if (m.dim() != w.dim()) throw ConfigError("max_gen_eig: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ew(w.m());
  const double wmin = ew.eigenvalues().minCoeff();
  if (wmin <= 1e-12 * std::max(1.0, w.norm())) {
    throw NumericalError("max_gen_eig: W is not positive definite (min eig " +
                         std::to_string(wmin) + ")");
  }
  const Eigen::VectorXd inv_sqrt = ew.eigenvalues().cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd w_inv_sqrt =
      ew.eigenvectors() * inv_sqrt.asDiagonal() * ew.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w_inv_sqrt * m.m() * w_inv_sqrt);
  const int top = m.dim() - 1;
  GenEigResult out;
  out.lambda_max = es.eigenvalues()(top);
  out.certificate_vector = w_inv_sqrt * es.eigenvectors().col(top);
  return out;
}

SymMatrix sqrt_psd(const SymMatrix& x) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(x.m());
  Eigen::VectorXd ev = es.eigenvalues();
  const double floor = -1e-9 * std::max(x.norm(), 1e-300);
  for (int i = 0; i < ev.size(); ++i) {
    if (ev(i) < floor) {
      throw NumericalError("sqrt_psd: matrix is not positive semidefinite (eigenvalue " +
                           std::to_string(ev(i)) + ")");
    }
    ev(i) = std::max(ev(i), 0.0);
  }
  return SymMatrix(es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
                   es.eigenvectors().transpose());
}

}  // namespace corrsets
