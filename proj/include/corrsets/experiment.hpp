#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "corrsets/corrbound.hpp"
#include "corrsets/disturbance.hpp"
#include "corrsets/invariance.hpp"
#include "corrsets/probsets.hpp"

namespace corrsets {

// One self-contained experiment: system, disturbance description, violation
// levels and Monte Carlo sizes. Exactly one of `model` / `generator` must be
// set; a generator implies the envelope model via stationary_cov/decay_rate.
// `reference_bound`, when present, is the correlation bound the violation
// study runs against (the presets pin the published case-study matrices here
// so the simulations reproduce the reference experiments); the bound/pipeline
// commands always compute a fresh bound.
struct ExperimentConfig {
  Eigen::MatrixXd a;
  std::optional<CorrelationModel> model;
  std::optional<GeneratorConfig> generator;
  std::optional<SymMatrix> reference_bound;
  std::vector<double> violation_probabilities{0.1, 0.2, 0.3, 0.4, 0.5};
  int trajectories = 1000;
  int horizon = 100;
  std::uint64_t seed = 1;
  LevelDistribution distribution = LevelDistribution::gaussian;
  bool conservative = false;
  int eta_grid_size = 60;
  BoundRoute route = BoundRoute::cor1;

  void validate() const;
  CorrelationModel effective_model() const;
  int dim() const { return static_cast<int>(a.rows()); }
};

ExperimentConfig preset(const std::string& name);  // "example1" | "example2"
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Canonical serialization (fixed key order, 17-significant-digit numbers) and
// its FNV-1a hash; every output file records the hash as an audit trail.
std::string canonical_config_json(const ExperimentConfig& config);
std::uint64_t config_hash(const ExperimentConfig& config);

// `count` points x = sqrt(rho) W^{1/2} u/||u|| (u standard normal), all
// satisfying x^T W^{-1} x = rho up to round-off.
std::vector<Eigen::VectorXd> sample_boundary(const SymMatrix& w, double rho, int count,
                                             const rng::StreamKey& key);

struct ViolationReport {
  struct LevelResult {
    double p_v = 0.0;
    double rho = 0.0;
    std::vector<long> violations;  // violations[k-1] = v_k for k = 1..horizon
  };
  std::vector<LevelResult> levels;
  int trajectories = 0;
  int horizon = 0;
  std::uint64_t seed = 0;
  std::uint64_t hash = 0;
  SymMatrix w;
  SymMatrix gw;
  double lambda = 0.0;
  bool used_reference_bound = false;
};

// The published validation protocol: per violation level, N initial states
// uniform on the boundary of B(W, rho), one disturbance stream each,
// x_{k+1} = A x_k + w_k, count exits from B(W, rho) per step. Streams are
// independent per (level, trajectory); reductions are integer counts, so the
// report does not depend on `jobs`.
ViolationReport run_violation_study(const ExperimentConfig& config, int jobs = 1);

struct PipelineResult {
  CorrelationBound bound;
  InvariantEllipsoid invariant;
  std::vector<std::pair<double, double>> rho_table;  // (p_v, rho)
  ReachTube tube;
  std::uint64_t hash = 0;
};

// bound -> invariant -> levels -> tube, all from the computed bound. Grid
// points of the bound stage may be evaluated concurrently; the result is
// identical for any job count.
PipelineResult run_pipeline(const ExperimentConfig& config, int jobs = 1);

// Output writers. All floating-point values are printed with %.17g so that
// equal runs produce byte-identical files.
void write_violation_csv(const ViolationReport& report, std::ostream& os);
void write_study_json(const ViolationReport& report, const ExperimentConfig& config,
                      std::ostream& os);
void write_bound_json(const CorrelationBound& bound, std::uint64_t hash, std::ostream& os);
void write_invariant_json(const InvariantEllipsoid& inv,
                          const std::vector<std::pair<double, double>>& rho_table,
                          std::uint64_t hash, std::ostream& os);
void write_rho_table_csv(const InvariantEllipsoid& inv,
                         const std::vector<std::pair<double, double>>& rho_table,
                         std::ostream& os);
void write_pipeline_json(const PipelineResult& result, const ExperimentConfig& config,
                         std::ostream& os);

}  // namespace corrsets
