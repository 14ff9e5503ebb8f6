#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <variant>

#include "corrsets/symmat.hpp"

namespace corrsets {

// ---------------------------------------------------------------------------
// Counter-based random streams. Every draw is a pure function of
// (seed, domain, stream, step, draw index), so trajectories can be generated
// in any order or concurrently with bit-identical output.
// ---------------------------------------------------------------------------
namespace rng {

// Domain separators; keep values stable, they are part of the output contract.
enum Domain : std::uint64_t {
  kGeneratorInit = 1,
  kGeneratorInnovation = 2,
  kInitialState = 3,
  kMembershipSampling = 4,
  kTesting = 5,
};

std::uint64_t mix64(std::uint64_t z);

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t domain = 0;
  std::uint64_t stream = 0;  // e.g. trajectory index, possibly packed with a level index

  std::uint64_t base() const;
};

// Uniform on (0, 1), open at both ends.
double uniform01(const StreamKey& key, std::uint64_t step, std::uint64_t draw);

// Standard normal via Box-Muller on two counter draws.
double gaussian(const StreamKey& key, std::uint64_t step, std::uint64_t draw);

Eigen::VectorXd gaussian_vec(const StreamKey& key, std::uint64_t step, int dim);

}  // namespace rng

// ---------------------------------------------------------------------------
// Disturbance generators. A GeneratorConfig describes the process; a stream
// is a single-trajectory stateful sampler created per (config, stream id).
// ---------------------------------------------------------------------------

// w_{k+1} = H w_k + F u_k with u_k ~ N(0, U); w_0 ~ N(0, Gamma_tilde) where
// Gamma_tilde solves Gamma = H Gamma H^T + F U F^T (stationary start).
struct FilteredSpec {
  Eigen::MatrixXd h;
  Eigen::MatrixXd f;
  SymMatrix u;
};

// One draw w ~ N(0, Gamma_tilde) per trajectory; every sample equals w.
struct ConstantSpec {
  SymMatrix gamma_tilde;
};

// Fresh N(0, Gamma_tilde) at every step.
struct IidSpec {
  SymMatrix gamma_tilde;
};

struct GeneratorConfig {
  std::variant<FilteredSpec, ConstantSpec, IidSpec> kind;
  std::uint64_t seed = 0;

  int dim() const;
  // The covariance upper bound Gamma_tilde of the emitted sequence.
  SymMatrix covariance_bound() const;
};

class DisturbanceStream {
 public:
  virtual ~DisturbanceStream() = default;
  virtual Eigen::VectorXd next() = 0;
  virtual int dim() const = 0;
};

class FilteredNoiseGenerator final : public DisturbanceStream {
 public:
  FilteredNoiseGenerator(const FilteredSpec& spec, std::uint64_t seed, std::uint64_t stream);
  Eigen::VectorXd next() override;
  int dim() const override { return static_cast<int>(w_.size()); }

 private:
  Eigen::MatrixXd h_, f_, u_sqrt_;
  rng::StreamKey innovations_;
  std::uint64_t step_ = 0;
  Eigen::VectorXd w_;
};

class ConstantGenerator final : public DisturbanceStream {
 public:
  ConstantGenerator(const ConstantSpec& spec, std::uint64_t seed, std::uint64_t stream);
  Eigen::VectorXd next() override { return w_; }
  int dim() const override { return static_cast<int>(w_.size()); }

 private:
  Eigen::VectorXd w_;
};

class IidGenerator final : public DisturbanceStream {
 public:
  IidGenerator(const IidSpec& spec, std::uint64_t seed, std::uint64_t stream);
  Eigen::VectorXd next() override;
  int dim() const override { return sqrt_.rows(); }

 private:
  Eigen::MatrixXd sqrt_;
  rng::StreamKey key_;
  std::uint64_t step_ = 0;
};

std::unique_ptr<DisturbanceStream> make_stream(const GeneratorConfig& config,
                                               std::uint64_t stream);

// Stationary covariance of the filtered process: the fixed point of
// Gamma = H Gamma H^T + F U F^T.
SymMatrix stationary_cov(const Eigen::MatrixXd& h, const Eigen::MatrixXd& f,
                         const SymMatrix& u);

// Smallest gamma with H Gamma_tilde H^T <= gamma * Gamma_tilde.
double decay_rate(const Eigen::MatrixXd& h, const SymMatrix& gamma_tilde);

// Sample mean of w_i w_j^T over independent trajectories (i <= j). For the
// filtered process this estimates Gamma_tilde * (H^(j-i))^T.
Eigen::MatrixXd empirical_corr(const GeneratorConfig& config, int i, int j, int trials);

}  // namespace corrsets
