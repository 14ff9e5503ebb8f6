#include "corrsets/disturbance.hpp"

#include <cmath>
#include <numbers>

#include "corrsets/errors.hpp"

namespace corrsets {
namespace rng {

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t StreamKey::base() const {
  std::uint64_t h = mix64(seed ^ 0x5851f42d4c957f2dULL);
  h = mix64(h ^ domain);
  h = mix64(h ^ stream);
  return h;
}

double uniform01(const StreamKey& key, std::uint64_t step, std::uint64_t draw) {
  std::uint64_t h = mix64(key.base() ^ step);
  h = mix64(h ^ draw);
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double gaussian(const StreamKey& key, std::uint64_t step, std::uint64_t draw) {
  const double u1 = uniform01(key, step, 2 * draw);
  const double u2 = uniform01(key, step, 2 * draw + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd gaussian_vec(const StreamKey& key, std::uint64_t step, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = gaussian(key, step, static_cast<std::uint64_t>(i));
  return v;
}

}  // namespace rng

int GeneratorConfig::dim() const {
  return std::visit(
      [](const auto& spec) -> int {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, FilteredSpec>) return static_cast<int>(spec.h.rows());
        else return spec.gamma_tilde.dim();
      },
      kind);
}

SymMatrix GeneratorConfig::covariance_bound() const {
  return std::visit(
      [](const auto& spec) -> SymMatrix {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, FilteredSpec>)
          return stationary_cov(spec.h, spec.f, spec.u);
        else
          return spec.gamma_tilde;
      },
      kind);
}

FilteredNoiseGenerator::FilteredNoiseGenerator(const FilteredSpec& spec, std::uint64_t seed,
                                               std::uint64_t stream)
    : h_(spec.h), f_(spec.f) {
  if (h_.rows() != h_.cols()) throw ConfigError("filtered generator: H must be square");
  if (f_.rows() != h_.rows() || f_.cols() != spec.u.dim())
    throw ConfigError("filtered generator: F/U dimensions do not match H");
  u_sqrt_ = sqrt_psd(spec.u).m();
  const SymMatrix gt = stationary_cov(h_, f_, spec.u);
  rng::StreamKey init{seed, rng::kGeneratorInit, stream};
  w_ = sqrt_psd(gt).m() * rng::gaussian_vec(init, 0, gt.dim());
  innovations_ = rng::StreamKey{seed, rng::kGeneratorInnovation, stream};
}

Eigen::VectorXd FilteredNoiseGenerator::next() {
  Eigen::VectorXd out = w_;
  const Eigen::VectorXd u = u_sqrt_ * rng::gaussian_vec(innovations_, step_, u_sqrt_.rows());
  w_ = h_ * w_ + f_ * u;
  ++step_;
  return out;
}

ConstantGenerator::ConstantGenerator(const ConstantSpec& spec, std::uint64_t seed,
                                     std::uint64_t stream) {
  rng::StreamKey init{seed, rng::kGeneratorInit, stream};
  w_ = sqrt_psd(spec.gamma_tilde).m() * rng::gaussian_vec(init, 0, spec.gamma_tilde.dim());
}

IidGenerator::IidGenerator(const IidSpec& spec, std::uint64_t seed, std::uint64_t stream)
    : sqrt_(sqrt_psd(spec.gamma_tilde).m()),
      key_{seed, rng::kGeneratorInnovation, stream} {}

Eigen::VectorXd IidGenerator::next() {
  return sqrt_ * rng::gaussian_vec(key_, step_++, sqrt_.rows());
}

std::unique_ptr<DisturbanceStream> make_stream(const GeneratorConfig& config,
                                               std::uint64_t stream) {
  return std::visit(
      [&](const auto& spec) -> std::unique_ptr<DisturbanceStream> {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, FilteredSpec>)
          return std::make_unique<FilteredNoiseGenerator>(spec, config.seed, stream);
        else if constexpr (std::is_same_v<T, ConstantSpec>)
          return std::make_unique<ConstantGenerator>(spec, config.seed, stream);
        else
          return std::make_unique<IidGenerator>(spec, config.seed, stream);
      },
      config.kind);
}

SymMatrix stationary_cov(const Eigen::MatrixXd& h, const Eigen::MatrixXd& f,
                         const SymMatrix& u) {
  if (spectral_radius(h) >= 1.0)
    throw NumericalError("stationary_cov: shaping filter is not asymptotically stable");
  return dlyap(h, SymMatrix(f * u.m() * f.transpose()));
}

double decay_rate(const Eigen::MatrixXd& h, const SymMatrix& gamma_tilde) {
  return max_gen_eig(SymMatrix(h * gamma_tilde.m() * h.transpose()), gamma_tilde).lambda_max;
}

Eigen::MatrixXd empirical_corr(const GeneratorConfig& config, int i, int j, int trials) {
  if (i > j) throw ConfigError("empirical_corr: requires i <= j");
  if (trials < 1000) throw ConfigError("empirical_corr: requires at least 1000 trials");
  const int n = config.dim();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  for (int t = 0; t < trials; ++t) {
    auto stream = make_stream(config, static_cast<std::uint64_t>(t));
    Eigen::VectorXd wi, wj;
    for (int k = 0; k <= j; ++k) {
      const Eigen::VectorXd w = stream->next();
      if (k == i) wi = w;
      if (k == j) wj = w;
    }
    acc += wi * wj.transpose();
  }
  return acc / static_cast<double>(trials);
}

}  // namespace corrsets
