#include "corrsets/probsets.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "corrsets/disturbance.hpp"
#include "corrsets/errors.hpp"

namespace corrsets {

bool contains(const Ellipsoid& e, const Eigen::VectorXd& x, double tol) {
  const int n = e.gamma.dim();
  if (x.size() != n) throw ConfigError("contains: dimension mismatch");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.gamma.m());
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double rank_cut = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  const Eigen::VectorXd coords = es.eigenvectors().transpose() * x;
  const double null_tol = 1e-9 * std::max(1.0, x.norm());
  double quad = 0.0;
  for (int i = 0; i < n; ++i) {
    if (ev(i) <= rank_cut) {
      if (std::abs(coords(i)) > null_tol) return false;  // outside range(Gamma^{1/2})
    } else {
      quad += coords(i) * coords(i) / ev(i);
    }
  }
  return quad <= e.r + tol;
}

MinkowskiReport minkowski_outer_check(const Eigen::MatrixXd& a, const SymMatrix& gamma_tilde,
                                      const SymMatrix& sigma, double r, int samples,
                                      std::uint64_t seed) {
  const int n = gamma_tilde.dim();
  if (a.rows() != n || a.cols() != n || sigma.dim() != n)
    throw ConfigError("minkowski_outer_check: dimension mismatch");
  if (!(r > 0)) throw ConfigError("minkowski_outer_check: r must be positive");
  if (min_eig(sigma) <= 0)
    throw ConfigError("minkowski_outer_check: Sigma must be positive definite");

  const Eigen::MatrixXd m = a * gamma_tilde.m() * a.transpose() + sigma.m();
  const Eigen::MatrixXd m_inv = m.inverse();
  const Eigen::MatrixXd m_sqrt = sqrt_psd(SymMatrix(m)).m();
  const Eigen::MatrixXd gt_sqrt = sqrt_psd(gamma_tilde).m();
  const Eigen::MatrixXd sg_sqrt = sqrt_psd(sigma).m();

  MinkowskiReport report;
  report.samples = samples;
  const rng::StreamKey key{seed, rng::kMembershipSampling, 0};
  for (int i = 0; i < samples; ++i) {
    Eigen::VectorXd d = rng::gaussian_vec(key, static_cast<std::uint64_t>(i), n);
    const double dn = d.norm();
    if (dn < 1e-300) continue;
    d /= dn;
    // Bias the radius toward the boundary, where the inclusion is tight.
    const double scale =
        std::pow(rng::uniform01(key, static_cast<std::uint64_t>(i), 1u << 20), 0.125);
    const Eigen::VectorXd x = std::sqrt(r) * scale * (m_sqrt * d);

    const Eigen::VectorXd minv_x = m_inv * x;
    const Eigen::VectorXd y = gt_sqrt * a.transpose() * minv_x;
    const Eigen::VectorXd w = sg_sqrt * minv_x;

    const double residual = (a * gt_sqrt * y + sg_sqrt * w - x).norm();
    report.max_residual = std::max(report.max_residual, residual);
    if (residual > 1e-8 * std::max(1.0, x.norm()))
      throw NumericalError("minkowski_outer_check: split reconstruction residual " +
                           std::to_string(residual));
    const double excess = std::max(y.squaredNorm() - r, w.squaredNorm() - r);
    report.max_norm_excess = std::max(report.max_norm_excess, excess);
    if (excess > 1e-9 * std::max(1.0, r)) ++report.violations;
  }
  return report;
}

ReachTube reach_tube(const Eigen::MatrixXd& a, const SymMatrix& gw, double r, int K) {
  const int n = gw.dim();
  if (a.rows() != n || a.cols() != n) throw ConfigError("reach_tube: dimension mismatch");
  if (!(r > 0)) throw ConfigError("reach_tube: r must be positive");
  if (K < 1) throw ConfigError("reach_tube: K must be >= 1");
  if (min_eig(gw) <= 0) throw ConfigError("reach_tube: Gw must be positive definite");
  if (spectral_radius(a) >= 1.0) throw ConfigError("reach_tube: rho(A) must be < 1");

  ReachTube tube;
  tube.r = r;
  tube.violation_level = static_cast<double>(n) / r;
  tube.levels.reserve(K);
  Eigen::MatrixXd g = gw.m();
  tube.levels.emplace_back(g);
  for (int k = 1; k < K; ++k) {
    g = a * g * a.transpose() + gw.m();
    tube.levels.emplace_back(g);
  }
  return tube;
}

void write_tube_csv(const ReachTube& tube, std::ostream& os) {
  const int n = tube.levels.empty() ? 0 : tube.levels.front().dim();
  os << "k,r";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) os << ",gamma_" << i << j;
  os << "\n";
  char buf[32];
  for (size_t k = 0; k < tube.levels.size(); ++k) {
    os << (k + 1);
    std::snprintf(buf, sizeof buf, "%.17g", tube.r);
    os << ',' << buf;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", tube.levels[k](i, j));
        os << ',' << buf;
      }
    os << "\n";
  }
}

double chebyshev_level(int n, double epsilon) {
  if (n < 1) throw ConfigError("chebyshev_level: n must be >= 1");
  if (!(epsilon > 0 && epsilon <= 1)) throw ConfigError("chebyshev_level: epsilon in (0, 1]");
  return static_cast<double>(n) / epsilon;
}

namespace {

// Regularized lower incomplete gamma P(a, x): series for x < a + 1, Lentz
// continued fraction for the upper tail otherwise.
double gamma_p(double a, double x) {
  if (x <= 0) return 0.0;
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int k = 1; k < 500; ++k) {
      term *= x / (a + k);
      sum += term;
      if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  double b = x + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k < 500; ++k) {
    const double an = -k * (k - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 - h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double chi2_pdf(int n, double x) {
  const double a = 0.5 * n;
  if (x <= 0) return 0.0;
  return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - std::lgamma(a));
}

}  // namespace

double chi2_cdf(int n, double x) {
  if (n < 1) throw ConfigError("chi2_cdf: n must be >= 1");
  if (x < 0) throw ConfigError("chi2_cdf: x must be >= 0");
  return gamma_p(0.5 * n, 0.5 * x);
}

double chi2_inv(int n, double q) {
  if (n < 1) throw ConfigError("chi2_inv: n must be >= 1");
  if (!(q > 0 && q < 1)) throw ConfigError("chi2_inv: q must lie in (0, 1)");

  // Wilson-Hilferty start, then safeguarded Newton on the CDF.
  const double zq = [&] {
    // Crude normal quantile is enough for an initial guess.
    double lo = -40, hi = 40;
    for (int i = 0; i < 80; ++i) {
      const double mid = 0.5 * (lo + hi);
      (0.5 * std::erfc(-mid / std::sqrt(2.0)) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  const double c = 2.0 / (9.0 * n);
  double x = n * std::pow(1.0 - c + zq * std::sqrt(c), 3);
  if (!(x > 0)) x = 1e-8;

  double lo = 0.0, hi = x;
  while (chi2_cdf(n, hi) < q) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double f = chi2_cdf(n, x) - q;
    if (f > 0) hi = std::min(hi, x);
    else lo = std::max(lo, x);
    const double df = chi2_pdf(n, x);
    double xn = (df > 1e-300) ? x - f / df : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) < 1e-13 * (1.0 + x) && std::abs(f) < 1e-11) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

}  // namespace corrsets
