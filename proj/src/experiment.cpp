#include "corrsets/experiment.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "corrsets/errors.hpp"
#include "corrsets/parallel.hpp"

namespace corrsets {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt_matrix(const Eigen::MatrixXd& m) {
  std::string out = "[";
  for (int i = 0; i < m.rows(); ++i) {
    out += (i ? ",[" : "[");
    for (int j = 0; j < m.cols(); ++j) {
      if (j) out += ",";
      out += fmt(m(i, j));
    }
    out += "]";
  }
  return out + "]";
}

Eigen::MatrixXd parse_matrix(const nlohmann::json& j, const std::string& name) {
  if (!j.is_array() || j.empty())
    throw ConfigError("config: " + name + " must be a non-empty nested array");
  const size_t rows = j.size();
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ConfigError("config: " + name + " must be a nested array");
  Eigen::MatrixXd m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw ConfigError("config: ragged rows in " + name);
    for (size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (a.rows() == 0 || a.rows() != a.cols())
    throw ConfigError("config: A must be a non-empty square matrix");
  if (model.has_value() == generator.has_value())
    throw ConfigError("config: exactly one of model / generator must be given");
  if (generator) {
    if (generator->dim() != dim())
      throw ConfigError("config: generator dimension does not match A");
    if (const auto* filt = std::get_if<FilteredSpec>(&generator->kind)) {
      if (filt->h.rows() != filt->h.cols())
        throw ConfigError("config: generator.H must be square");
      if (spectral_radius(filt->h) >= 1.0)
        throw ConfigError("config: generator.H must be asymptotically stable");
      if (filt->f.rows() != filt->h.rows() || filt->f.cols() != filt->u.dim())
        throw ConfigError("config: generator F/U dimensions do not match H");
      if (min_eig(filt->u) < -1e-9 * std::max(1.0, filt->u.norm()))
        throw ConfigError("config: generator.U must be positive semidefinite");
    } else {
      const SymMatrix gt = generator->covariance_bound();
      if (min_eig(gt) < -1e-9 * std::max(1.0, gt.norm()))
        throw ConfigError("config: generator covariance must be positive semidefinite");
    }
  }
  if (model) model->validate();
  if (reference_bound) {
    if (reference_bound->dim() != dim())
      throw ConfigError("config: reference_bound dimension does not match A");
    if (min_eig(*reference_bound) <= 0)
      throw ConfigError("config: reference_bound must be positive definite");
  }
  if (violation_probabilities.empty())
    throw ConfigError("config: at least one violation probability required");
  for (double p : violation_probabilities)
    if (!(p > 0 && p < 1))
      throw ConfigError("config: violation probabilities must lie in (0, 1)");
  if (trajectories < 1) throw ConfigError("config: trajectories must be >= 1");
  if (horizon < 1) throw ConfigError("config: horizon must be >= 1");
  if (eta_grid_size < 1) throw ConfigError("config: eta_grid_size must be >= 1");
}

CorrelationModel ExperimentConfig::effective_model() const {
  validate();
  if (model) return *model;
  CorrelationModel m;
  m.a = a;
  if (const auto* filt = std::get_if<FilteredSpec>(&generator->kind)) {
    m.gamma_tilde = stationary_cov(filt->h, filt->f, filt->u);
    m.alpha = 0.0;
    m.beta = 1.0;
    m.gamma = decay_rate(filt->h, m.gamma_tilde);
  } else if (const auto* cons = std::get_if<ConstantSpec>(&generator->kind)) {
    m.gamma_tilde = cons->gamma_tilde;
    m.alpha = 1.0;
    m.beta = 0.0;
    m.gamma = 0.5;  // immaterial for beta = 0
  } else {
    m.gamma_tilde = std::get<IidSpec>(generator->kind).gamma_tilde;
    m.alpha = 0.0;
    m.beta = 0.0;
    m.gamma = 0.5;  // immaterial for beta = 0
  }
  m.validate();
  return m;
}

ExperimentConfig preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.a = Eigen::MatrixXd{{0.25, 0.0}, {0.1, 0.3}};
  if (name == "example1") {
    FilteredSpec filt;
    filt.h = Eigen::MatrixXd{{0.75, -0.2}, {0.0, 0.6}};
    filt.f = Eigen::MatrixXd{{1.0, 2.0}, {0.5, -3.0}};
    filt.u = SymMatrix::diag(Eigen::Vector2d{1.5, 0.26});
    cfg.generator = GeneratorConfig{filt, cfg.seed};
    cfg.reference_bound =
        SymMatrix(Eigen::MatrixXd{{19.5198, -5.9726}, {-5.9726, 10.5646}});
  } else if (name == "example2") {
    ConstantSpec cons;
    cons.gamma_tilde = SymMatrix(Eigen::MatrixXd{{0.4785, -0.7254}, {-0.7254, 1.5215}});
    cfg.generator = GeneratorConfig{cons, cfg.seed};
    cfg.reference_bound =
        SymMatrix(Eigen::MatrixXd{{1.1877, -1.8007}, {-1.8007, 3.7767}});
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected example1 or example2)");
  }
  return cfg;
}

ExperimentConfig parse_config_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    ExperimentConfig cfg;
    cfg.a = parse_matrix(j.at("A"), "A");
    if (j.contains("model")) {
      const auto& jm = j["model"];
      CorrelationModel m;
      m.a = cfg.a;
      m.gamma_tilde = SymMatrix(parse_matrix(jm.at("gamma_tilde"), "model.gamma_tilde"));
      m.alpha = jm.at("alpha").get<double>();
      m.beta = jm.at("beta").get<double>();
      m.gamma = jm.at("gamma").get<double>();
      if (jm.contains("allow_gamma_ge_one"))
        m.allow_gamma_ge_one = jm["allow_gamma_ge_one"].get<bool>();
      cfg.model = m;
    }
    if (j.contains("generator")) {
      const auto& jg = j["generator"];
      const std::string type = jg.at("type").get<std::string>();
      GeneratorConfig g;
      if (type == "filtered") {
        FilteredSpec f;
        f.h = parse_matrix(jg.at("H"), "generator.H");
        f.f = parse_matrix(jg.at("F"), "generator.F");
        f.u = SymMatrix(parse_matrix(jg.at("U"), "generator.U"));
        g.kind = f;
      } else if (type == "constant") {
        g.kind = ConstantSpec{SymMatrix(parse_matrix(jg.at("gamma_tilde"),
                                                     "generator.gamma_tilde"))};
      } else if (type == "iid") {
        g.kind = IidSpec{SymMatrix(parse_matrix(jg.at("gamma_tilde"),
                                                "generator.gamma_tilde"))};
      } else {
        throw ConfigError("config: unknown generator type '" + type + "'");
      }
      cfg.generator = g;
    }
    if (j.contains("reference_bound"))
      cfg.reference_bound = SymMatrix(parse_matrix(j["reference_bound"], "reference_bound"));
    if (j.contains("violation_probabilities"))
      cfg.violation_probabilities =
          j["violation_probabilities"].get<std::vector<double>>();
    if (j.contains("trajectories")) cfg.trajectories = j["trajectories"].get<int>();
    if (j.contains("horizon")) cfg.horizon = j["horizon"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("distribution")) {
      const std::string d = j["distribution"].get<std::string>();
      if (d == "gaussian") cfg.distribution = LevelDistribution::gaussian;
      else if (d == "chebyshev") cfg.distribution = LevelDistribution::chebyshev;
      else throw ConfigError("config: distribution must be gaussian or chebyshev");
    }
    if (j.contains("conservative")) cfg.conservative = j["conservative"].get<bool>();
    if (j.contains("eta_grid_size")) cfg.eta_grid_size = j["eta_grid_size"].get<int>();
    if (j.contains("bound_route")) {
      const std::string r = j["bound_route"].get<std::string>();
      if (r == "prop1") cfg.route = BoundRoute::prop1;
      else if (r == "cor1") cfg.route = BoundRoute::cor1;
      else throw ConfigError("config: bound_route must be prop1 or cor1");
    }
    if (cfg.generator) cfg.generator->seed = cfg.seed;
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_json(ss.str());
}

std::string canonical_config_json(const ExperimentConfig& config) {
  std::string out = "{\"A\":" + fmt_matrix(config.a);
  if (config.model) {
    out += ",\"model\":{\"alpha\":" + fmt(config.model->alpha) +
           ",\"beta\":" + fmt(config.model->beta) +
           ",\"gamma\":" + fmt(config.model->gamma) +
           std::string(",\"allow_gamma_ge_one\":") +
           (config.model->allow_gamma_ge_one ? "true" : "false") +
           ",\"gamma_tilde\":" + fmt_matrix(config.model->gamma_tilde.m()) + "}";
  }
  if (config.generator) {
    out += ",\"generator\":";
    if (const auto* f = std::get_if<FilteredSpec>(&config.generator->kind)) {
      out += "{\"type\":\"filtered\",\"H\":" + fmt_matrix(f->h) +
             ",\"F\":" + fmt_matrix(f->f) + ",\"U\":" + fmt_matrix(f->u.m()) + "}";
    } else if (const auto* c = std::get_if<ConstantSpec>(&config.generator->kind)) {
      out += "{\"type\":\"constant\",\"gamma_tilde\":" + fmt_matrix(c->gamma_tilde.m()) + "}";
    } else {
      out += "{\"type\":\"iid\",\"gamma_tilde\":" +
             fmt_matrix(std::get<IidSpec>(config.generator->kind).gamma_tilde.m()) + "}";
    }
  }
  if (config.reference_bound)
    out += ",\"reference_bound\":" + fmt_matrix(config.reference_bound->m());
  out += ",\"violation_probabilities\":[";
  for (size_t i = 0; i < config.violation_probabilities.size(); ++i) {
    if (i) out += ",";
    out += fmt(config.violation_probabilities[i]);
  }
  out += "],\"trajectories\":" + std::to_string(config.trajectories);
  out += ",\"horizon\":" + std::to_string(config.horizon);
  out += ",\"seed\":" + std::to_string(config.seed);
  out += std::string(",\"distribution\":\"") + to_string(config.distribution) + "\"";
  out += std::string(",\"conservative\":") + (config.conservative ? "true" : "false");
  out += ",\"eta_grid_size\":" + std::to_string(config.eta_grid_size);
  out += std::string(",\"bound_route\":\"") + to_string(config.route) + "\"}";
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  const std::string s = canonical_config_json(config);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<Eigen::VectorXd> sample_boundary(const SymMatrix& w, double rho, int count,
                                             const rng::StreamKey& key) {
  const int n = w.dim();
  if (min_eig(w) <= 1e-12 * std::max(1.0, w.norm()))
    throw ConfigError("sample_boundary: W must be positive definite");
  if (!(rho > 0)) throw ConfigError("sample_boundary: rho must be positive");
  const Eigen::MatrixXd w_sqrt = sqrt_psd(w).m();
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd u = rng::gaussian_vec(key, static_cast<std::uint64_t>(i), n);
    for (std::uint64_t retry = 1; u.norm() < 1e-300 && retry < 4; ++retry)
      u = rng::gaussian_vec(key, static_cast<std::uint64_t>(i) + (retry << 40), n);
    if (u.norm() < 1e-300) throw NumericalError("sample_boundary: degenerate direction draw");
    out.push_back(std::sqrt(rho) * (w_sqrt * (u / u.norm())));
  }
  return out;
}

namespace {

struct StudySet {
  SymMatrix gw;
  InvariantEllipsoid inv;
  bool used_reference = false;
};

StudySet study_invariant_set(const ExperimentConfig& config, int jobs) {
  StudySet s;
  if (config.reference_bound) {
    s.gw = *config.reference_bound;
    s.used_reference = true;
  } else {
    const CorrelationModel model = config.effective_model();
    const auto grid = default_eta_grid(config.a, config.eta_grid_size);
    const CorrelationBound bound = config.route == BoundRoute::prop1
                                       ? compute_bound_prop1(model, grid, jobs)
                                       : compute_bound_cor1(model, grid, jobs);
    s.gw = bound.gw;
  }
  s.inv = synth_invariant(config.a, s.gw);
  return s;
}

}  // namespace

ViolationReport run_violation_study(const ExperimentConfig& config, int jobs) {
  config.validate();
  if (!config.generator)
    throw ConfigError("simulate: a generator specification is required (an envelope "
                      "model alone cannot be sampled)");
  const int n = config.dim();

  StudySet set;
  try {
    set = study_invariant_set(config, jobs);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw InfeasibleError(std::string("simulate: invariant-set stage failed: ") + e.what());
  }

  ViolationReport report;
  report.trajectories = config.trajectories;
  report.horizon = config.horizon;
  report.seed = config.seed;
  report.hash = config_hash(config);
  report.w = set.inv.w;
  report.gw = set.gw;
  report.lambda = set.inv.lambda;
  report.used_reference_bound = set.used_reference;

  const Eigen::MatrixXd w_sqrt = sqrt_psd(set.inv.w).m();
  const Eigen::MatrixXd w_inv = set.inv.w.m().inverse();

  // The experiment seed governs both the initial states and the disturbance
  // streams, whatever the generator spec carried.
  GeneratorConfig generator = *config.generator;
  generator.seed = config.seed;

  for (size_t lvl = 0; lvl < config.violation_probabilities.size(); ++lvl) {
    const double p_v = config.violation_probabilities[lvl];
    ViolationSpec spec{n, p_v, config.distribution, config.conservative};
    const double rho = level_for_violation(spec, set.inv.lambda);

    constexpr long kChunk = 256;
    const long chunks = (config.trajectories + kChunk - 1) / kChunk;
    std::vector<std::vector<long>> counts(chunks);

    parallel_chunked(config.trajectories, kChunk, jobs, [&](long c, long beginT, long endT) {
      std::vector<long> local(config.horizon, 0);
      for (long t = beginT; t < endT; ++t) {
        const std::uint64_t stream =
            (static_cast<std::uint64_t>(lvl) << 40) | static_cast<std::uint64_t>(t);
        rng::StreamKey x0_key{config.seed, rng::kInitialState, stream};
        Eigen::VectorXd u = rng::gaussian_vec(x0_key, 0, n);
        for (std::uint64_t retry = 1; u.norm() < 1e-300 && retry < 4; ++retry)
          u = rng::gaussian_vec(x0_key, retry, n);
        if (u.norm() < 1e-300)
          throw NumericalError("simulate: degenerate direction draw");
        Eigen::VectorXd x = std::sqrt(rho) * (w_sqrt * (u / u.norm()));
        auto wstream = make_stream(generator, stream);
        for (int k = 0; k < config.horizon; ++k) {
          x = config.a * x + wstream->next();
          if (x.dot(w_inv * x) > rho) ++local[k];
        }
      }
      counts[c] = std::move(local);
    });

    ViolationReport::LevelResult level;
    level.p_v = p_v;
    level.rho = rho;
    level.violations.assign(config.horizon, 0);
    for (long c = 0; c < chunks; ++c)
      for (int k = 0; k < config.horizon; ++k) level.violations[k] += counts[c][k];
    report.levels.push_back(std::move(level));
  }
  return report;
}

PipelineResult run_pipeline(const ExperimentConfig& config, int jobs) {
  config.validate();
  PipelineResult result;
  result.hash = config_hash(config);
  const CorrelationModel model = config.effective_model();
  const auto grid = default_eta_grid(config.a, config.eta_grid_size);
  try {
    result.bound = config.route == BoundRoute::prop1
                       ? compute_bound_prop1(model, grid, jobs)
                       : compute_bound_cor1(model, grid, jobs);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw InfeasibleError("pipeline: correlation-bound stage failed (inputs " +
                          hash_hex(result.hash) + "): " + e.what());
  }
  try {
    result.invariant = synth_invariant(config.a, result.bound.gw);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw InfeasibleError("pipeline: invariant-set stage failed (inputs " +
                          hash_hex(result.hash) + "): " + e.what());
  }
  for (double p_v : config.violation_probabilities) {
    ViolationSpec spec{config.dim(), p_v, config.distribution, config.conservative};
    result.rho_table.emplace_back(p_v, level_for_violation(spec, result.invariant.lambda));
  }
  result.tube = reach_tube(config.a, result.bound.gw,
                           chebyshev_level(config.dim(), config.violation_probabilities[0]),
                           config.horizon);
  return result;
}

void write_violation_csv(const ViolationReport& report, std::ostream& os) {
  os << "p_v,k,violations,frequency,rho,seed\n";
  for (const auto& level : report.levels) {
    for (size_t k = 0; k < level.violations.size(); ++k) {
      const double freq =
          static_cast<double>(level.violations[k]) / report.trajectories;
      os << fmt(level.p_v) << ',' << (k + 1) << ',' << level.violations[k] << ','
         << fmt(freq) << ',' << fmt(level.rho) << ',' << report.seed << "\n";
    }
  }
}

void write_study_json(const ViolationReport& report, const ExperimentConfig& config,
                      std::ostream& os) {
  os << "{\n";
  os << "  \"config_hash\": \"" << hash_hex(report.hash) << "\",\n";
  os << "  \"seed\": " << report.seed << ",\n";
  os << "  \"trajectories\": " << report.trajectories << ",\n";
  os << "  \"horizon\": " << report.horizon << ",\n";
  os << "  \"distribution\": \"" << to_string(config.distribution) << "\",\n";
  os << "  \"conservative\": " << (config.conservative ? "true" : "false") << ",\n";
  os << "  \"used_reference_bound\": " << (report.used_reference_bound ? "true" : "false")
     << ",\n";
  os << "  \"A\": " << fmt_matrix(config.a) << ",\n";
  os << "  \"gw\": " << fmt_matrix(report.gw.m()) << ",\n";
  os << "  \"w\": " << fmt_matrix(report.w.m()) << ",\n";
  os << "  \"lambda\": " << fmt(report.lambda) << ",\n";
  os << "  \"levels\": [";
  for (size_t i = 0; i < report.levels.size(); ++i) {
    if (i) os << ",";
    os << "\n    {\"p_v\": " << fmt(report.levels[i].p_v)
       << ", \"rho\": " << fmt(report.levels[i].rho) << "}";
  }
  os << "\n  ]\n}\n";
}

void write_bound_json(const CorrelationBound& bound, std::uint64_t hash, std::ostream& os) {
  os << "{\n";
  os << "  \"config_hash\": \"" << hash_hex(hash) << "\",\n";
  os << "  \"route\": \"" << to_string(bound.route) << "\",\n";
  os << "  \"eta\": " << fmt(bound.eta) << ",\n";
  os << "  \"phi\": " << fmt(bound.phi) << ",\n";
  os << "  \"p\": " << fmt(bound.p) << ",\n";
  os << "  \"coefficient\": " << fmt(bound.coefficient) << ",\n";
  os << "  \"gw\": " << fmt_matrix(bound.gw.m()) << ",\n";
  os << "  \"s\": " << fmt_matrix(bound.s.m()) << "\n";
  os << "}\n";
}

void write_invariant_json(const InvariantEllipsoid& inv,
                          const std::vector<std::pair<double, double>>& rho_table,
                          std::uint64_t hash, std::ostream& os) {
  os << "{\n";
  os << "  \"config_hash\": \"" << hash_hex(hash) << "\",\n";
  os << "  \"construction\": \"" << to_string(inv.construction) << "\",\n";
  os << "  \"lambda\": " << fmt(inv.lambda) << ",\n";
  os << "  \"w\": " << fmt_matrix(inv.w.m()) << ",\n";
  os << "  \"rho_table\": [";
  for (size_t i = 0; i < rho_table.size(); ++i) {
    if (i) os << ",";
    os << "\n    {\"p_v\": " << fmt(rho_table[i].first)
       << ", \"rho\": " << fmt(rho_table[i].second) << "}";
  }
  os << "\n  ]\n}\n";
}

void write_rho_table_csv(const InvariantEllipsoid& inv,
                         const std::vector<std::pair<double, double>>& rho_table,
                         std::ostream& os) {
  os << "p_v,rho,lambda,construction\n";
  for (const auto& [p_v, rho] : rho_table) {
    os << fmt(p_v) << ',' << fmt(rho) << ',' << fmt(inv.lambda) << ','
       << to_string(inv.construction) << "\n";
  }
}

void write_pipeline_json(const PipelineResult& result, const ExperimentConfig& config,
                         std::ostream& os) {
  const CorrelationModel model = config.effective_model();
  os << "{\n";
  os << "  \"config_hash\": \"" << hash_hex(result.hash) << "\",\n";
  os << "  \"model\": {\"alpha\": " << fmt(model.alpha) << ", \"beta\": " << fmt(model.beta)
     << ", \"gamma\": " << fmt(model.gamma)
     << ", \"gamma_tilde\": " << fmt_matrix(model.gamma_tilde.m()) << "},\n";
  os << "  \"bound\": {\"route\": \"" << to_string(result.bound.route)
     << "\", \"eta\": " << fmt(result.bound.eta) << ", \"phi\": " << fmt(result.bound.phi)
     << ", \"p\": " << fmt(result.bound.p)
     << ", \"coefficient\": " << fmt(result.bound.coefficient)
     << ", \"gw\": " << fmt_matrix(result.bound.gw.m())
     << ", \"s\": " << fmt_matrix(result.bound.s.m()) << "},\n";
  os << "  \"invariant\": {\"construction\": \"" << to_string(result.invariant.construction)
     << "\", \"lambda\": " << fmt(result.invariant.lambda)
     << ", \"w\": " << fmt_matrix(result.invariant.w.m()) << "},\n";
  if (config.reference_bound)
    os << "  \"reference_bound\": " << fmt_matrix(config.reference_bound->m()) << ",\n";
  os << "  \"rho_table\": [";
  for (size_t i = 0; i < result.rho_table.size(); ++i) {
    if (i) os << ",";
    os << "\n    {\"p_v\": " << fmt(result.rho_table[i].first)
       << ", \"rho\": " << fmt(result.rho_table[i].second) << "}";
  }
  os << "\n  ],\n";
  os << "  \"tube\": {\"r\": " << fmt(result.tube.r)
     << ", \"violation_level\": " << fmt(result.tube.violation_level)
     << ", \"steps\": " << result.tube.levels.size() << "}\n";
  os << "}\n";
}

}  // namespace corrsets
