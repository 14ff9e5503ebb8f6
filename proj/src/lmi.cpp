#include "corrsets/lmi.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "corrsets/errors.hpp"

namespace corrsets {

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

std::vector<Eigen::MatrixXd> sym_basis(int n) {
  std::vector<Eigen::MatrixXd> basis;
  basis.reserve(n * (n + 1) / 2);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
      e(i, j) = e(j, i) = inv_sqrt2;
      basis.push_back(e);
    }
  }
  return basis;
}

namespace {

Eigen::MatrixXd eval_block(const LmiBlock& b, const Eigen::VectorXd& x) {
  Eigen::MatrixXd g = b.g0;
  for (int i = 0; i < x.size(); ++i) {
    if (!b.gi[i].isZero(0.0)) g += x(i) * b.gi[i];
  }
  return 0.5 * (g + g.transpose());
}

double block_min_eig(const Eigen::MatrixXd& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double min_margin(const std::vector<LmiBlock>& blocks, const Eigen::VectorXd& x) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) m = std::min(m, block_min_eig(eval_block(b, x)));
  return m;
}

// Damped-Newton minimization of t*c^T x - sum_b log det G_b(x) from a strictly
// feasible start. Returns false if the iteration budget runs out before the
// Newton decrement is small. `early_stop`, when set, aborts centering as soon
// as the predicate holds at the current iterate (used by phase I).
bool center(const std::vector<LmiBlock>& blocks, const Eigen::VectorXd& c, double t,
            Eigen::VectorXd& x, int& newton_budget,
            const std::function<bool(const Eigen::VectorXd&)>& early_stop = {}) {
  const int m = static_cast<int>(c.size());
  while (newton_budget > 0) {
    --newton_budget;
    if (early_stop && early_stop(x)) return true;

    Eigen::VectorXd grad = t * c;
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m, m);
    double barrier = 0.0;
    for (const auto& b : blocks) {
      const Eigen::MatrixXd g = eval_block(b, x);
      Eigen::LLT<Eigen::MatrixXd> llt(g);
      if (llt.info() != Eigen::Success) return false;  // lost feasibility
      for (int i = 0; i < static_cast<int>(g.rows()); ++i)
        barrier -= 2.0 * std::log(llt.matrixL()(i, i));
      std::vector<Eigen::MatrixXd> ginv_gi(m);
      const Eigen::MatrixXd ginv = llt.solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
      for (int i = 0; i < m; ++i) {
        if (b.gi[i].isZero(0.0)) continue;
        ginv_gi[i] = ginv * b.gi[i];
        grad(i) -= ginv_gi[i].trace();
      }
      for (int i = 0; i < m; ++i) {
        if (b.gi[i].isZero(0.0)) continue;
        for (int j = i; j < m; ++j) {
          if (b.gi[j].isZero(0.0)) continue;
          const double hij = (ginv_gi[i] * ginv_gi[j]).trace();
          hess(i, j) += hij;
          if (j != i) hess(j, i) += hij;
        }
      }
    }
    hess.diagonal().array() += 1e-13 * (1.0 + hess.diagonal().maxCoeff());

    Eigen::LDLT<Eigen::MatrixXd> hs(hess);
    const Eigen::VectorXd step = hs.solve(-grad);
    const double decrement2 = -grad.dot(step);
    // Path following only needs an approximately centered point; the residual
    // objective error of a centering stopped at squared decrement d is ~d/t,
    // far below the final barrier gap. Demanding much more than this is not
    // achievable at large t anyway (the Hessian condition grows like t^2).
    if (!(decrement2 > 1e-4)) return true;

    const double f0 = t * c.dot(x) + barrier;
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd xn = x + alpha * step;
      bool ok = true;
      double fn = t * c.dot(xn);
      for (const auto& b : blocks) {
        Eigen::LLT<Eigen::MatrixXd> llt(eval_block(b, xn));
        if (llt.info() != Eigen::Success) {
          ok = false;
          break;
        }
        for (int i = 0; i < llt.matrixL().rows(); ++i)
          fn -= 2.0 * std::log(llt.matrixL()(i, i));
      }
      if (ok && fn <= f0 - 0.25 * alpha * decrement2) {
        x = xn;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return true;  // step too small to make progress; treat as centered
  }
  return false;
}

double problem_scale(const std::vector<LmiBlock>& blocks) {
  double s = 1.0;
  for (const auto& b : blocks) {
    s = std::max(s, b.g0.cwiseAbs().maxCoeff());
    for (const auto& g : b.gi)
      if (g.size() > 0) s = std::max(s, g.cwiseAbs().maxCoeff());
  }
  return s;
}

}  // namespace

SdpSolution solve_small_sdp(const SdpProblem& problem, const SdpOptions& options) {
  const int m = problem.nvar();
  SdpSolution out;

  // Constant and identically-zero blocks cannot enter the barrier.
  std::vector<LmiBlock> blocks;
  double scale = problem_scale(problem.blocks);
  for (const auto& b : problem.blocks) {
    bool has_var = false;
    for (const auto& g : b.gi)
      if (!g.isZero(1e-14 * scale)) has_var = true;
    if (has_var) {
      blocks.push_back(b);
    } else if (block_min_eig(b.g0) < -1e-12 * scale) {
      out.status = SdpStatus::infeasible;
      return out;
    }
  }
  if (blocks.empty()) {
    out.status = SdpStatus::optimal;
    out.x = Eigen::VectorXd::Zero(m);
    out.objective = 0.0;
    out.margin = 0.0;
    return out;
  }

  int total_size = 0;
  for (const auto& b : blocks) total_size += static_cast<int>(b.g0.rows());

  // ---- Phase I: maximize the feasibility margin through a slack variable.
  // Without further constraints the slack problem is unbounded (scaling the
  // variables inflates the barrier indefinitely), so the search is boxed at a
  // generous multiple of the data scale; solutions beyond the box are treated
  // as infeasible.
  std::vector<LmiBlock> ph1 = blocks;
  for (auto& b : ph1) {
    for (auto& g : b.gi) {
      if (g.size() == 0) g = Eigen::MatrixXd::Zero(b.g0.rows(), b.g0.cols());
    }
    b.gi.push_back(Eigen::MatrixXd::Identity(b.g0.rows(), b.g0.cols()));
  }
  const double box = 1e6 * scale;
  for (int i = 0; i <= m; ++i) {
    LmiBlock lo, hi;
    lo.g0 = hi.g0 = Eigen::MatrixXd::Constant(1, 1, box);
    for (int j = 0; j <= m; ++j) {
      lo.gi.push_back(Eigen::MatrixXd::Constant(1, 1, j == i ? 1.0 : 0.0));
      hi.gi.push_back(Eigen::MatrixXd::Constant(1, 1, j == i ? -1.0 : 0.0));
    }
    ph1.push_back(lo);
    ph1.push_back(hi);
  }
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(m + 1);
  c1(m) = 1.0;

  Eigen::VectorXd x1 = Eigen::VectorXd::Zero(m + 1);
  x1(m) = -min_margin(blocks, Eigen::VectorXd::Zero(m)) + scale;

  const double strict_target = 1e-11 * scale;
  int budget = options.max_newton;
  bool found_strict = false;
  auto stop_when_strict = [&](const Eigen::VectorXd& xc) {
    if (xc(m) < -strict_target) {
      found_strict = true;
      return true;
    }
    return false;
  };
  // Resolving the slack optimum below ~1e-8 * scale is pointless: problems
  // with an interior thinner than the 1e-7 feasibility tolerance are treated
  // as infeasible, and pushing t further only runs into conditioning limits.
  double t = 1.0 / scale;
  const double ph1_gap = std::max(1e-12, 1e-8 * scale);
  const int ph1_size = total_size + 2 * (m + 1);
  while (budget > 0 && !found_strict) {
    if (!center(ph1, c1, t, x1, budget, stop_when_strict)) break;
    if (found_strict) break;
    if ((ph1_size + 0.0) / t < ph1_gap) break;  // margin optimum located
    t *= options.mu;
  }
  if (!found_strict) {
    // No strictly feasible point: infeasible when the slack optimum was
    // located (or pushed to near zero before the budget ran out, the
    // signature of a marginally feasible problem), failure otherwise.
    out.status = (budget > 0 || x1(m) < 1e-7 * scale) ? SdpStatus::infeasible
                                                      : SdpStatus::numerical_failure;
    out.margin = -x1(m);
    return out;
  }

  // ---- Phase II: follow the central path of the original problem.
  Eigen::VectorXd x = x1.head(m);
  const double cost_scale = std::max(1.0, problem.cost.cwiseAbs().maxCoeff());
  t = 1.0 / cost_scale;
  budget = options.max_newton;
  while (true) {
    if (!center(blocks, problem.cost, t, x, budget)) {
      if (budget <= 0) {
        out.status = SdpStatus::numerical_failure;
        return out;
      }
    }
    const double gap = total_size / t;
    if (gap <= options.gap_tol * cost_scale * std::max(1.0, std::abs(problem.cost.dot(x))))
      break;
    if (budget <= 0) {
      out.status = SdpStatus::numerical_failure;
      return out;
    }
    t *= options.mu;
  }

  out.status = SdpStatus::optimal;
  out.x = x;
  out.objective = problem.cost.dot(x);
  out.margin = min_margin(blocks, x);
  return out;
}

namespace {

Eigen::MatrixXd assemble_sym(const std::vector<Eigen::MatrixXd>& basis,
                             const Eigen::VectorXd& x, int n) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (size_t k = 0; k < basis.size(); ++k) s += x(static_cast<int>(k)) * basis[k];
  return s;
}

constexpr double kFeasTol = 1e-7;

}  // namespace

SdpCertificate min_phi(const Eigen::MatrixXd& a, const SymMatrix& gamma_tilde, double eta) {
  const int n = gamma_tilde.dim();
  if (a.rows() != n || a.cols() != n) throw ConfigError("min_phi: dimension mismatch");
  if (min_eig(gamma_tilde) <= 0) throw ConfigError("min_phi: Gamma_tilde must be positive definite");
  const double rho2 = std::pow(spectral_radius(a), 2);
  if (eta < rho2 - 1e-12 || eta >= 1.0) {
    throw ConfigError("min_phi: eta must lie in [rho(A)^2, 1), got " + std::to_string(eta));
  }

  const auto basis = sym_basis(n);
  const int ms = static_cast<int>(basis.size());
  const int nvar = ms + 1;  // vech(S), phi
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(n, n);

  SdpProblem prob;
  prob.cost = Eigen::VectorXd::Zero(nvar);
  prob.cost(ms) = 1.0;

  LmiBlock lower;  // S - Gamma_tilde >= 0
  lower.g0 = -gamma_tilde.m();
  for (const auto& e : basis) lower.gi.push_back(e);
  lower.gi.push_back(zero);

  LmiBlock upper;  // phi * Gamma_tilde - S >= 0
  upper.g0 = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : basis) upper.gi.push_back(-e);
  upper.gi.push_back(gamma_tilde.m());

  LmiBlock contract;  // eta * S - A S A^T >= 0
  contract.g0 = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : basis) contract.gi.push_back(eta * e - a * e * a.transpose());
  contract.gi.push_back(zero);

  LmiBlock phi_floor;  // phi >= 1
  phi_floor.g0 = Eigen::MatrixXd::Constant(1, 1, -1.0);
  for (int i = 0; i < ms; ++i) phi_floor.gi.push_back(Eigen::MatrixXd::Zero(1, 1));
  phi_floor.gi.push_back(Eigen::MatrixXd::Identity(1, 1));

  prob.blocks = {lower, upper, contract, phi_floor};

  SdpCertificate cert;
  const SdpSolution sol = solve_small_sdp(prob);
  cert.status = sol.status;
  if (sol.status != SdpStatus::optimal) return cert;

  SymMatrix s(assemble_sym(basis, sol.x.head(ms), n));
  const double phi = std::max(1.0, sol.x(ms));
  cert.S = s;
  cert.objective = phi;
  cert.scalars["phi"] = phi;
  cert.scalars["eta"] = eta;

  const SymMatrix asat(a * s.m() * a.transpose());
  if (!psd_leq(gamma_tilde, s, kFeasTol) ||
      !psd_leq(s, SymMatrix(phi * gamma_tilde.m()), kFeasTol) ||
      !psd_leq(asat, SymMatrix(eta * s.m()), kFeasTol)) {
    cert.status = SdpStatus::numerical_failure;
  }
  return cert;
}

SdpCertificate min_trace_corrbound(const CorrelationModel& model, double eta, double p) {
  model.validate();
  const int n = model.dim();
  const double rho2 = std::pow(spectral_radius(model.a), 2);
  if (eta < rho2 - 1e-12 || eta >= 1.0) {
    throw ConfigError("min_trace_corrbound: eta must lie in [rho(A)^2, 1)");
  }
  const double p_lo = std::max(eta, model.gamma * eta);
  if (!(p > p_lo && p < 1.0)) {
    throw ConfigError("min_trace_corrbound: p must lie in (max(eta, gamma*eta), 1)");
  }

  const double cs = (model.alpha > 0 ? model.alpha * eta / (p - eta) : 0.0) +
                    (model.beta > 0 ? model.beta * model.gamma * eta / (p - model.gamma * eta)
                                    : 0.0);
  const double cg = p / (1.0 - p) + 1.0;

  const auto basis = sym_basis(n);
  const int ms = static_cast<int>(basis.size());

  SdpProblem prob;
  prob.cost = Eigen::VectorXd::Zero(ms);
  for (int i = 0; i < n; ++i) prob.cost(i) = 1.0;  // trace(S): diagonal coordinates

  LmiBlock lower;  // S - Gamma_tilde >= 0
  lower.g0 = -model.gamma_tilde.m();
  for (const auto& e : basis) lower.gi.push_back(e);

  LmiBlock contract;  // eta * S - A S A^T >= 0
  contract.g0 = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : basis)
    contract.gi.push_back(eta * e - model.a * e * model.a.transpose());

  prob.blocks = {lower, contract};

  SdpCertificate cert;
  const SdpSolution sol = solve_small_sdp(prob);
  cert.status = sol.status;
  if (sol.status != SdpStatus::optimal) return cert;

  SymMatrix s(assemble_sym(basis, sol.x, n));
  cert.S = s;
  cert.objective = cs * s.trace() + cg * model.gamma_tilde.trace();
  cert.scalars["eta"] = eta;
  cert.scalars["p"] = p;
  cert.scalars["s_coefficient"] = cs;
  cert.scalars["gamma_coefficient"] = cg;

  const SymMatrix asat(model.a * s.m() * model.a.transpose());
  if (!psd_leq(model.gamma_tilde, s, kFeasTol) ||
      !psd_leq(asat, SymMatrix(eta * s.m()), kFeasTol)) {
    cert.status = SdpStatus::numerical_failure;
  }
  return cert;
}

std::vector<double> default_s_grid() {
  std::vector<double> grid(200);
  for (int i = 0; i < 200; ++i) grid[i] = std::pow(10.0, -3.0 + 6.0 * i / 199.0);
  return grid;
}

SdpCertificate ellipsoid_sum_inclusion(const Eigen::MatrixXd& a, const SymMatrix& w,
                                       const SymMatrix& gw, double r,
                                       const std::vector<double>& s_grid) {
  const int n = w.dim();
  if (a.rows() != n || a.cols() != n || gw.dim() != n)
    throw ConfigError("ellipsoid_sum_inclusion: dimension mismatch");
  if (s_grid.empty()) throw ConfigError("ellipsoid_sum_inclusion: empty multiplier grid");
  if (r <= 0) throw ConfigError("ellipsoid_sum_inclusion: r must be positive");
  if (min_eig(w) <= 0 || min_eig(gw) <= 0)
    throw ConfigError("ellipsoid_sum_inclusion: W and Gw must be positive definite");

  const Eigen::MatrixXd awat = a * w.m() * a.transpose();
  SdpCertificate cert;
  cert.status = SdpStatus::infeasible;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (double s : s_grid) {
    if (!(s > 0)) throw ConfigError("ellipsoid_sum_inclusion: multipliers must be positive");
    const Eigen::MatrixXd outer = (1.0 + 1.0 / s) * awat + (1.0 + s) * r * gw.m();
    const double margin = min_eig(SymMatrix(w.m() - outer));
    if (margin > best_margin) {
      best_margin = margin;
      cert.S = SymMatrix(outer);
      cert.scalars["s"] = s;
      cert.scalars["margin"] = margin;
      cert.objective = margin;
    }
  }
  if (best_margin >= -kFeasTol) cert.status = SdpStatus::optimal;
  return cert;
}

}  // namespace corrsets
