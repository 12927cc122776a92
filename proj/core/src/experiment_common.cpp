#include "experiment_common.hpp"

#include <cmath>
#include <cstdio>

#include "roughop/errors.hpp"
#include "roughop/functional.hpp"

namespace roughop {

namespace {

void require_names(const std::vector<std::string>& names, const std::vector<std::string>& allowed,
                   const std::string& what) {
  for (const std::string& n : names)
    if (std::find(allowed.begin(), allowed.end(), n) == allowed.end())
      throw ConfigError("unknown " + what + " '" + n + "'");
}

}  // namespace

ExperimentConfig ExperimentConfig::resolve(const Config& config, const std::string& scope) {
  const auto& scopes = Config::scopes();
  if (std::find(scopes.begin(), scopes.end(), scope) == scopes.end())
    throw ConfigError("unknown experiment '" + scope + "'");
  ExperimentConfig c;
  c.scope = scope;
  c.model = config.get("model", scope);
  require_names({c.model}, {"bm", "fbm", "mixed"}, "model");
  c.hurst = config.get_double("hurst", scope);
  c.alpha = config.get_double("alpha", scope);
  c.beta = config.get_double("beta", scope);
  c.horizon = config.get_double("horizon", scope);
  c.grid_n = config.get_size("grid_n", scope);
  const std::string spacing = config.get("spacing", scope);
  require_names({spacing}, {"uniform", "explicit"}, "spacing");
  c.functional = config.get("functional", scope);
  c.functionals = config.get_list("functionals", scope);
  c.fields = config.get_list("fields", scope);
  c.paths = config.get_size("paths", scope);
  c.seed = config.get_u64("seed", scope);
  const std::string method = config.get("method", scope);
  require_names({method}, {"quadrature", "mc"}, "method");
  const std::size_t nodes = config.get_size("quad_nodes", scope);
  const std::size_t samples = config.get_size("mc_samples", scope);
  c.method = method == "quadrature" ? ExpectationMethod::quadrature(nodes)
                                    : ExpectationMethod::monte_carlo(samples, c.seed, 0x6d63ULL);
  c.grid_sweep = config.get_sizes("grid_sweep", scope);
  if (spacing == "explicit") {
    c.times = config.get_doubles("times", scope);
    (void)TimeGrid::from_times(c.times, c.horizon);
    c.grid_n = c.times.size();
    c.grid_sweep = {c.grid_n};
  }
  c.hurst_sweep = config.get_doubles("hurst_sweep", scope);
  c.offsets = config.get_size("offsets", scope);
  c.regression_offsets = config.get_size("regression_offsets", scope);
  c.s_points = config.get_doubles("s_points", scope);
  c.sampler = config.get("sampler", scope);
  require_names({c.sampler}, {"cholesky", "circulant", "both"}, "sampler");
  c.save_ensemble = config.get_bool("save_ensemble", scope);
  c.lemma_elements = config.get_size("lemma_elements", scope);

  require_names({c.functional}, catalog_names(), "functional");
  require_names(c.functionals, catalog_names(), "functional");
  require_names(c.fields, {"deterministic", "adapted_affine", "nonadapted_affine"}, "test field");
  require_names(config.get_list("suite", scope), Config::scopes(), "experiment");
  if (c.paths < 1000) throw ConfigError("paths must be at least 1000 for statistical claims");
  if (c.grid_n < 2) throw ConfigError("grid_n must be at least 2");
  if (!(c.horizon > 0.0)) throw ConfigError("horizon must be positive");
  if (nodes < 2 || nodes > 128) throw ConfigError("quad_nodes must lie in [2, 128]");
  for (std::size_t n : c.grid_sweep)
    if (n < 2) throw ConfigError("grid_sweep entries must be at least 2");
  for (double h : c.hurst_sweep) HurstParameter{h};
  HurstParameter{c.hurst};

  for (const auto& [k, v] : config.resolved(scope)) c.echo[k] = v;
  return c;
}

CovarianceModel ExperimentConfig::covariance_model() const { return covariance_model(hurst); }

CovarianceModel ExperimentConfig::covariance_model(double h) const {
  if (model == "bm") return CovarianceModel::brownian();
  if (model == "mixed") return CovarianceModel::mixed(alpha, beta, HurstParameter(h));
  return CovarianceModel::fractional(HurstParameter(h));
}

namespace detail {

Report make_report(const ExperimentConfig& cfg, const std::string& experiment, const std::string& model,
                   double hurst, std::size_t grid_n) {
  Report r;
  r.experiment = experiment;
  r.model = model;
  r.hurst = hurst;
  r.grid_n = grid_n;
  r.seed = cfg.seed;
  r.config = cfg.echo;
  r.provenance["library"] = "roughop";
  r.provenance["version"] = ROUGHOP_VERSION;
  r.provenance["scope"] = cfg.scope;
  r.provenance["rng"] = "mt19937_64, seed_seq(seed, stream), 256 paths per stream";
  return r;
}

Json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"variance", s.variance}, {"se", s.standard_error}, {"count", s.count}};
}

bool within_se(double a, double se_a, double b, double se_b, double k) {
  return std::abs(a - b) <= k * std::sqrt(se_a * se_a + se_b * se_b);
}

std::string fmt(const char* format, double a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a);
  return buf;
}

std::string fmt(const char* format, double a, double b) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b);
  return buf;
}

std::string fmt(const char* format, double a, double b, double c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

TimeGrid experiment_grid(const ExperimentConfig& cfg, std::size_t n) {
  if (!cfg.times.empty()) return TimeGrid::from_times(cfg.times, cfg.horizon);
  return TimeGrid::uniform(n, cfg.horizon);
}

}  // namespace detail

const std::vector<std::string>& experiment_names() { return Config::scopes(); }

std::string experiment_description(const std::string& name) {
  if (name == "simulate") return "Cholesky and circulant samplers, marginal and increment laws, increment-norm identity";
  if (name == "lemma") return "adapted projection versus Gaussian regression coefficients";
  if (name == "adjointness") return "E[F delta(u)] = E[<DF, u>] over the functional catalog and test fields";
  if (name == "isometry") return "isometry defect E[delta(u)^2] - E|u|^2 against its closed form";
  if (name == "factorize") return "factorization residual F - E[F] - delta(Pi D F) under grid refinement";
  if (name == "factorize_exact") return "factorization residual in the exactly telescoping Brownian case";
  if (name == "remainder") return "controlled-expansion remainder scaling against |t - s|^{4H}";
  if (name == "gubinelli") return "pairing slope versus per-path regression slope of the conditional mean";
  if (name == "mixed") return "mixed model alpha B + beta B^H on the component system";
  throw ConfigError("unknown experiment '" + name + "'");
}

Report run_experiment(const std::string& name, const Config& config, const RunOptions& options) {
  const ExperimentConfig cfg = ExperimentConfig::resolve(config, name);
  if (name == "simulate") return run_simulate(cfg, options);
  if (name == "lemma") return run_projection_lemma(cfg, options);
  if (name == "adjointness") return run_adjointness(cfg, options);
  if (name == "isometry") return run_isometry_defect(cfg, options);
  if (name == "factorize" || name == "factorize_exact") return run_factorization(cfg, options);
  if (name == "remainder") return run_remainder_scaling(cfg, options);
  if (name == "gubinelli") return run_gubinelli_compare(cfg, options);
  return run_mixed(cfg, options);
}

std::vector<Report> run_suite(const Config& config, const RunOptions& options) {
  std::vector<Report> out;
  for (const std::string& name : config.get_list("suite")) out.push_back(run_experiment(name, config, options));
  return out;
}

Report summarize_suite(const std::vector<Report>& reports, const Config& config) {
  Report s;
  s.experiment = "verify_all";
  s.model = "suite";
  s.hurst = 0.5;
  s.grid_n = 0;
  s.seed = config.get_u64("seed");
  for (const auto& [k, v] : config.entries()) s.config[k] = v;
  s.provenance["library"] = "roughop";
  s.provenance["version"] = ROUGHOP_VERSION;
  s.table.columns = {"experiment", "report", "checks", "failed", "passed"};
  for (const Report& r : reports) {
    std::int64_t failed = 0;
    for (const Check& c : r.checks) failed += c.passed ? 0 : 1;
    s.table.add({r.experiment, report_stem(r), static_cast<std::int64_t>(r.checks.size()), failed, r.passed()});
    s.results.push_back({{"experiment", r.experiment}, {"report", report_stem(r)}, {"passed", r.passed()}});
    s.check(r.experiment, r.passed(),
            std::to_string(failed) + " of " + std::to_string(r.checks.size()) + " checks failed");
  }
  return s;
}

}  // namespace roughop
