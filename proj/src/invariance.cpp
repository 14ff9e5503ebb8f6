#include "corrsets/invariance.hpp"

#include <cmath>
#include <limits>

#include "corrsets/errors.hpp"
#include "corrsets/probsets.hpp"

namespace corrsets {

const char* to_string(InvariantConstruction c) {
  return c == InvariantConstruction::lyapunov_equality ? "lyapunov-equality" : "robust-sproc";
}

const char* to_string(LevelDistribution d) {
  return d == LevelDistribution::chebyshev ? "chebyshev" : "gaussian";
}

InvariantEllipsoid synth_invariant(const Eigen::MatrixXd& a, const SymMatrix& gw) {
  if (a.rows() != a.cols() || a.rows() != gw.dim())
    throw ConfigError("synth_invariant: dimension mismatch");
  if (spectral_radius(a) >= 1.0) throw ConfigError("synth_invariant: rho(A) must be < 1");
  if (min_eig(gw) <= 0) throw ConfigError("synth_invariant: Gw must be positive definite");

  InvariantEllipsoid out;
  out.w = dlyap(a, gw);
  out.lambda = max_gen_eig(SymMatrix(a * out.w.m() * a.transpose()), out.w).lambda_max;
  out.construction = InvariantConstruction::lyapunov_equality;
  return out;
}

double level_for_violation(const ViolationSpec& spec, double lambda) {
  if (!(lambda >= 0 && lambda < 1))
    throw ConfigError("level_for_violation: lambda must lie in [0, 1)");
  if (spec.n < 1) throw ConfigError("level_for_violation: n must be >= 1");
  if (!(spec.p_v > 0 && spec.p_v < 1))
    throw ConfigError("level_for_violation: p_v must lie in (0, 1)");
  const double shrink = spec.conservative_mode
                            ? std::pow(1.0 - std::sqrt(lambda), 2)
                            : 1.0 - lambda;
  if (spec.distribution == LevelDistribution::chebyshev)
    return spec.n / (shrink * spec.p_v);
  return chi2_inv(spec.n, 1.0 - spec.p_v) / shrink;
}

InvariantEllipsoid synth_invariant_robust(const Eigen::MatrixXd& a, const SymMatrix& gw,
                                          double r, const std::vector<double>& s_grid) {
  if (a.rows() != a.cols() || a.rows() != gw.dim())
    throw ConfigError("synth_invariant_robust: dimension mismatch");
  if (!(r > 0)) throw ConfigError("synth_invariant_robust: r must be positive");
  if (min_eig(gw) <= 0)
    throw ConfigError("synth_invariant_robust: Gw must be positive definite");
  if (s_grid.empty()) throw ConfigError("synth_invariant_robust: empty multiplier grid");
  const double rho2 = std::pow(spectral_radius(a), 2);
  if (rho2 >= 1.0) throw ConfigError("synth_invariant_robust: rho(A) must be < 1");

  InvariantEllipsoid best;
  double best_trace = std::numeric_limits<double>::infinity();
  bool found = false;
  for (double s : s_grid) {
    if (!(s > 0))
      throw ConfigError("synth_invariant_robust: multipliers must be positive");
    const double amp = 1.0 + 1.0 / s;
    if (amp * rho2 >= 1.0) continue;  // dlyap would not converge at this s
    const SymMatrix w = dlyap(std::sqrt(amp) * a, gw.scaled((1.0 + s) * r));
    if (w.trace() < best_trace) {
      best_trace = w.trace();
      best.w = w;
      found = true;
    }
  }
  if (!found)
    throw InfeasibleError("synth_invariant_robust: no multiplier on the grid makes "
                          "the contraction feasible");
  best.lambda = max_gen_eig(SymMatrix(a * best.w.m() * a.transpose()), best.w).lambda_max;
  best.construction = InvariantConstruction::robust_sproc;
  return best;
}

bool check_prop5(const Eigen::MatrixXd& a, const SymMatrix& gw, const SymMatrix& w,
                 double r) {
  if (r < 1.0) throw ConfigError("check_prop5: requires r >= 1");
  const SdpCertificate premise = ellipsoid_sum_inclusion(a, w, gw, r, default_s_grid());
  if (premise.status != SdpStatus::optimal) return true;  // vacuous
  return psd_leq(SymMatrix(a * w.m() * a.transpose() + gw.m()), w, 1e-7);
}

}  // namespace corrsets
