#include "corrsets/corrbound.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "corrsets/errors.hpp"
#include "corrsets/parallel.hpp"

namespace corrsets {

void CorrelationModel::validate() const {
  if (a.rows() != a.cols() || a.rows() != gamma_tilde.dim())
    throw ConfigError("CorrelationModel: A and Gamma_tilde dimensions do not match");
  if (spectral_radius(a) >= 1.0)
    throw ConfigError("CorrelationModel: rho(A) must be < 1");
  if (min_eig(gamma_tilde) <= 0)
    throw ConfigError("CorrelationModel: Gamma_tilde must be positive definite");
  if (alpha < 0 || beta < 0) throw ConfigError("CorrelationModel: alpha, beta must be >= 0");
  if (!(gamma > 0) || (!allow_gamma_ge_one && gamma >= 1))
    throw ConfigError("CorrelationModel: gamma must lie in (0, 1) unless the "
                      "gamma >= 1 extension is enabled");
}

const char* to_string(BoundRoute r) {
  return r == BoundRoute::prop1 ? "prop1" : "cor1";
}

namespace {

// Golden-section minimization of a strictly unimodal f on [lo, hi].
double golden_section(const std::function<double(double)>& f, double lo, double hi,
                      double xtol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 300 && (b - a) > xtol; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  return f1 <= f2 ? x1 : x2;
}

double coefficient_terms(double alpha, double beta, double gamma, double eta, double phi,
                         double p) {
  double h = p / (1.0 - p);
  if (alpha > 0 && eta > 0) h += alpha * phi * eta / (p - eta);
  if (beta > 0 && eta > 0) h += beta * phi * gamma * eta / (p - gamma * eta);
  return h;
}

}  // namespace

POptResult optimal_p(double alpha, double beta, double gamma, double eta, double phi) {
  if (!(eta >= 0 && eta < 1)) throw ConfigError("optimal_p: eta must lie in [0, 1)");
  if (phi < 1) throw ConfigError("optimal_p: phi must be >= 1");
  if (alpha < 0 || beta < 0) throw ConfigError("optimal_p: alpha, beta must be >= 0");
  if (!(gamma > 0)) throw ConfigError("optimal_p: gamma must be positive");

  const double lo = std::max(eta, gamma * eta) + 1e-9;
  const double hi = 1.0 - 1e-9;
  if (lo >= hi)
    throw ConfigError("optimal_p: empty search interval, gamma * eta must be < 1");
  auto h = [&](double p) { return coefficient_terms(alpha, beta, gamma, eta, phi, p); };
  POptResult out;
  out.p = golden_section(h, lo, hi, 1e-10);
  out.cost = h(out.p);
  return out;
}

std::vector<double> default_eta_grid(const Eigen::MatrixXd& a, int points) {
  if (points < 1) throw ConfigError("default_eta_grid: need at least one point");
  const double lo = std::pow(spectral_radius(a), 2);
  const double hi = 0.999;
  std::vector<double> grid(points);
  if (points == 1) {
    grid[0] = lo;
    return grid;
  }
  for (int i = 0; i < points; ++i) grid[i] = lo + (hi - lo) * i / (points - 1);
  return grid;
}

namespace {

void check_grid(const CorrelationModel& model, const std::vector<double>& grid) {
  model.validate();
  if (grid.empty()) throw ConfigError("compute_bound: empty eta grid");
  const double rho2 = std::pow(spectral_radius(model.a), 2);
  for (double eta : grid) {
    if (eta < rho2 - 1e-12 || eta >= 1.0)
      throw ConfigError("compute_bound: grid point " + std::to_string(eta) +
                        " outside [rho(A)^2, 1)");
  }
}

[[noreturn]] void throw_all_infeasible(const std::vector<std::string>& reasons) {
  std::ostringstream os;
  os << "compute_bound: no feasible eta on the grid;";
  for (const auto& r : reasons) os << "\n  " << r;
  throw InfeasibleError(os.str());
}

}  // namespace

CorrelationBound compute_bound_prop1(const CorrelationModel& model,
                                     const std::vector<double>& eta_grid, int jobs) {
  check_grid(model, eta_grid);
  const long points = static_cast<long>(eta_grid.size());
  std::vector<CorrelationBound> candidates(points);
  std::vector<std::string> failures(points);

  // Grid points are independent; evaluate them concurrently and reduce in
  // index order so the result does not depend on the job count.
  parallel_chunked(points, 1, jobs, [&](long idx, long, long) {
    const double eta = eta_grid[idx];
    if (std::max(eta, model.gamma * eta) >= 1.0 - 2e-9) {
      failures[idx] = "eta=" + std::to_string(eta) + ": empty p interval (gamma*eta >= 1)";
      return;
    }
    const SdpCertificate phi_cert = min_phi(model.a, model.gamma_tilde, eta);
    if (phi_cert.status != SdpStatus::optimal) {
      failures[idx] =
          "eta=" + std::to_string(eta) + ": min_phi " + to_string(phi_cert.status);
      return;
    }
    const double phi = phi_cert.objective;
    const POptResult popt = optimal_p(model.alpha, model.beta, model.gamma, eta, phi);
    CorrelationBound& c = candidates[idx];
    c.eta = eta;
    c.phi = phi;
    c.p = popt.p;
    c.s = phi_cert.S;
    c.coefficient = popt.cost + 1.0;
    c.route = BoundRoute::prop1;
  });

  CorrelationBound best;
  bool found = false;
  std::vector<std::string> reasons;
  for (long idx = 0; idx < points; ++idx) {
    if (!failures[idx].empty()) {
      reasons.push_back(failures[idx]);
      continue;
    }
    if (!found || candidates[idx].coefficient < best.coefficient) {
      best = candidates[idx];
      found = true;
    }
  }
  if (!found) throw_all_infeasible(reasons);
  best.gw = model.gamma_tilde.scaled(best.coefficient);
  return best;
}

CorrelationBound compute_bound_cor1(const CorrelationModel& model,
                                    const std::vector<double>& eta_grid, int jobs) {
  check_grid(model, eta_grid);
  const double tr_gamma = model.gamma_tilde.trace();
  const long points = static_cast<long>(eta_grid.size());
  std::vector<CorrelationBound> candidates(points);
  std::vector<double> traces(points, std::numeric_limits<double>::infinity());
  std::vector<std::string> failures(points);

  parallel_chunked(points, 1, jobs, [&](long idx, long, long) {
    const double eta = eta_grid[idx];
    const double p_lo = std::max(eta, model.gamma * eta);
    if (p_lo >= 1.0 - 2e-9) {
      failures[idx] = "eta=" + std::to_string(eta) + ": empty p interval (gamma*eta >= 1)";
      return;
    }
    const double p_ref = 0.5 * (p_lo + 1.0);
    const SdpCertificate ref = min_trace_corrbound(model, eta, p_ref);
    if (ref.status != SdpStatus::optimal) {
      failures[idx] = "eta=" + std::to_string(eta) + ": min_trace_corrbound " +
                      to_string(ref.status);
      return;
    }
    // The feasible S set does not depend on p, so the trace-minimal S from the
    // reference solve can be reused while p is optimized as a scalar.
    const double tr_s = ref.S.trace();
    auto objective = [&](double p) {
      const double cs = (model.alpha > 0 ? model.alpha * eta / (p - eta) : 0.0) +
                        (model.beta > 0
                             ? model.beta * model.gamma * eta / (p - model.gamma * eta)
                             : 0.0);
      return cs * tr_s + (p / (1.0 - p) + 1.0) * tr_gamma;
    };
    const double p_star = golden_section(objective, p_lo + 1e-9, 1.0 - 1e-9, 1e-10);
    const double cs = (model.alpha > 0 ? model.alpha * eta / (p_star - eta) : 0.0) +
                      (model.beta > 0 ? model.beta * model.gamma * eta /
                                            (p_star - model.gamma * eta)
                                      : 0.0);
    const double cg = p_star / (1.0 - p_star) + 1.0;
    CorrelationBound& c = candidates[idx];
    c.eta = eta;
    c.p = p_star;
    c.s = ref.S;
    c.gw = SymMatrix(cs * ref.S.m() + cg * model.gamma_tilde.m());
    c.route = BoundRoute::cor1;
    traces[idx] = objective(p_star);
  });

  CorrelationBound best;
  double best_trace = std::numeric_limits<double>::infinity();
  bool found = false;
  std::vector<std::string> reasons;
  for (long idx = 0; idx < points; ++idx) {
    if (!failures[idx].empty()) {
      reasons.push_back(failures[idx]);
      continue;
    }
    if (traces[idx] < best_trace) {
      best_trace = traces[idx];
      best = candidates[idx];
      found = true;
    }
  }
  if (!found) throw_all_infeasible(reasons);
  // Tightest scalar envelope Gw <= c * Gamma_tilde, for reporting; phi is not
  // part of the cor1 certificate.
  best.coefficient = max_gen_eig(best.gw, model.gamma_tilde).lambda_max;
  best.phi = 1.0;
  return best;
}

BoundVerification verify_bound_empirically(const CorrelationBound& bound,
                                           const Eigen::MatrixXd& a,
                                           const GeneratorConfig& generator, int horizon,
                                           int trials, int jobs) {
  if (horizon < 1) throw ConfigError("verify_bound_empirically: horizon must be >= 1");
  if (trials < 1000) throw ConfigError("verify_bound_empirically: needs >= 1000 trials");
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || generator.dim() != n || bound.gw.dim() != n)
    throw ConfigError("verify_bound_empirically: dimension mismatch");

  constexpr long kChunk = 512;
  const long chunks = (trials + kChunk - 1) / kChunk;

  // Pass 1: accumulate E[z_k w_k^T] and E[w_k w_k^T] per step.
  std::vector<std::vector<Eigen::MatrixXd>> zw(chunks), ww(chunks);
  parallel_chunked(trials, kChunk, jobs, [&](long c, long beginT, long endT) {
    std::vector<Eigen::MatrixXd> zw_c(horizon, Eigen::MatrixXd::Zero(n, n));
    std::vector<Eigen::MatrixXd> ww_c(horizon, Eigen::MatrixXd::Zero(n, n));
    for (long t = beginT; t < endT; ++t) {
      auto stream = make_stream(generator, static_cast<std::uint64_t>(t));
      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      for (int k = 0; k < horizon; ++k) {
        const Eigen::VectorXd w = stream->next();
        zw_c[k] += z * w.transpose();
        ww_c[k] += w * w.transpose();
        z = a * z + w;
      }
    }
    zw[c] = std::move(zw_c);
    ww[c] = std::move(ww_c);
  });

  std::vector<Eigen::VectorXd> top_vec(horizon);
  BoundVerification out;
  out.excess.resize(horizon);
  out.slack.resize(horizon);
  for (int k = 0; k < horizon; ++k) {
    Eigen::MatrixXd zw_k = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd ww_k = Eigen::MatrixXd::Zero(n, n);
    for (long c = 0; c < chunks; ++c) {
      zw_k += zw[c][k];
      ww_k += ww[c][k];
    }
    zw_k /= trials;
    ww_k /= trials;
    const Eigen::MatrixXd lhs = a * zw_k + zw_k.transpose() * a.transpose() + ww_k;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (lhs + lhs.transpose()) - bound.gw.m());
    out.excess[k] = es.eigenvalues()(n - 1);
    top_vec[k] = es.eigenvectors().col(n - 1);
  }

  // Pass 2: per-trajectory scalar projections in the worst direction give the
  // standard error of each excess estimate. Streams are counter-based, so the
  // replayed trajectories are identical to pass 1.
  std::vector<Eigen::VectorXd> sum_s(chunks), sum_s2(chunks);
  parallel_chunked(trials, kChunk, jobs, [&](long c, long beginT, long endT) {
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(horizon);
    Eigen::VectorXd s2 = Eigen::VectorXd::Zero(horizon);
    for (long t = beginT; t < endT; ++t) {
      auto stream = make_stream(generator, static_cast<std::uint64_t>(t));
      Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
      for (int k = 0; k < horizon; ++k) {
        const Eigen::VectorXd w = stream->next();
        const Eigen::VectorXd& v = top_vec[k];
        const double vw = v.dot(w);
        const double proj = 2.0 * v.dot(a * z) * vw + vw * vw;
        s1(k) += proj;
        s2(k) += proj * proj;
        z = a * z + w;
      }
    }
    sum_s[c] = std::move(s1);
    sum_s2[c] = std::move(s2);
  });

  out.pass = true;
  for (int k = 0; k < horizon; ++k) {
    double s1 = 0, s2 = 0;
    for (long c = 0; c < chunks; ++c) {
      s1 += sum_s[c](k);
      s2 += sum_s2[c](k);
    }
    const double mean = s1 / trials;
    const double var =
        std::max(0.0, (s2 / trials - mean * mean)) * trials / std::max(1, trials - 1);
    out.slack[k] = 3.0 * std::sqrt(var / trials);
    if (out.excess[k] > out.slack[k]) out.pass = false;
  }
  return out;
}

}  // namespace corrsets
