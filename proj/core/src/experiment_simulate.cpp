#include <cmath>

#include "experiment_common.hpp"
#include "roughop/ensemble_io.hpp"
#include "roughop/rng.hpp"

namespace roughop {

using detail::fmt;

namespace {

struct SamplerStats {
  Summary terminal;                // X_T^2
  std::vector<Summary> increment;  // (X_{mid+lag} - X_mid)^2 per lag
  double ks = 0.0;                 // X_T against N(0, Var X_T)
};

SamplerStats sampler_stats(const PathEnsemble& e, const std::vector<std::size_t>& lags, std::size_t mid,
                           double terminal_variance) {
  const std::size_t m = e.size();
  const std::size_t n = e.dim();
  SamplerStats s;
  std::vector<double> v(m), terminal(m);
  for (std::size_t r = 0; r < m; ++r) {
    terminal[r] = e.path(r)[n - 1];
    v[r] = terminal[r] * terminal[r];
  }
  s.terminal = summarize(v);
  s.ks = ks_statistic_normal(terminal, terminal_variance);
  for (std::size_t lag : lags) {
    for (std::size_t r = 0; r < m; ++r) {
      const auto p = e.path(r);
      const double d = p[mid + lag - 1] - (mid > 0 ? p[mid - 1] : 0.0);
      v[r] = d * d;
    }
    s.increment.push_back(summarize(v));
  }
  return s;
}

}  // namespace

Report run_simulate(const ExperimentConfig& cfg, const RunOptions& options) {
  std::vector<double> hursts = cfg.hurst_sweep;
  if (cfg.model == "bm") hursts = {0.5};
  const std::size_t n = cfg.grid_n;
  const TimeGrid grid = detail::experiment_grid(cfg, n);
  Report report = detail::make_report(cfg, cfg.scope, cfg.model, hursts.front(), n);
  report.table.columns = {"hurst", "sampler", "quantity", "lag", "estimate", "se", "reference", "z"};

  // Increment-norm identity Var(X_t - X_s) = |t - s|^{2H} on random triples.
  {
    RngStream rng(cfg.seed, 0x696e6372ULL);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double h = 0.01 + 0.98 * rng.uniform();
      double s = cfg.horizon * rng.uniform();
      double t = cfg.horizon * rng.uniform();
      if (s > t) std::swap(s, t);
      const double ref = std::pow(t - s, 2.0 * h);
      const double got = increment_variance(CovarianceModel::fractional(HurstParameter(h)), s, t);
      if (ref > 0.0) worst = std::max(worst, std::abs(got - ref) / ref);
    }
    report.results.push_back({{"quantity", "increment_norm_identity"}, {"triples", 1000}, {"max_relative_error", worst}});
    report.check("increment_norm_identity", worst <= 1e-12, fmt("max relative error %.3e (tolerance 1e-12)", worst));
  }

  const std::size_t mid = n / 2;
  std::vector<std::size_t> lags;
  for (std::size_t lag = 1; mid + lag <= n; lag *= 2) lags.push_back(lag);
  const bool use_cholesky = cfg.sampler != "circulant";
  const bool use_circulant = cfg.sampler != "cholesky" && cfg.model != "mixed";
  const double ks_critical = 1.63 / std::sqrt(static_cast<double>(cfg.paths));
  Json fallback = Json::object();

  for (double h : hursts) {
    const CovarianceModel model = cfg.covariance_model(h);
    const GramContext ctx(model, grid);
    const double terminal_variance = covariance(model, cfg.horizon, cfg.horizon);
    std::vector<std::pair<std::string, SamplerStats>> stats;
    if (use_cholesky) {
      const PathEnsemble e = sample_ensemble(ctx, cfg.paths, cfg.seed, {options.workers, 0});
      stats.emplace_back("cholesky", sampler_stats(e, lags, mid, terminal_variance));
      if (cfg.save_ensemble && !options.ensemble_dir.empty()) {
        std::filesystem::create_directories(options.ensemble_dir);
        write_ensemble(options.ensemble_dir / (report_stem(report) + "_" + fmt("%g", h) + ".bin"), e);
      }
    }
    if (use_circulant) {
      const PathEnsemble e = sample_ensemble_circulant(model, grid, cfg.paths, cfg.seed, {options.workers, 0});
      fallback[fmt("%g", h)] = e.circulant_fallback;
      stats.emplace_back("circulant", sampler_stats(e, lags, mid, terminal_variance));
    }

    for (const auto& [name, s] : stats) {
      const double zt = (s.terminal.mean - terminal_variance) / s.terminal.standard_error;
      report.table.add({h, name, std::string("terminal_variance"), std::int64_t{0}, s.terminal.mean,
                        s.terminal.standard_error, terminal_variance, zt});
      report.table.add({h, name, std::string("terminal_ks"), std::int64_t{0}, s.ks, 0.0, ks_critical, 0.0});
      report.check(fmt("terminal_ks_H%g_", h) + name, s.ks < ks_critical,
                   fmt("KS %.4g against 1%% critical value %.4g", s.ks, ks_critical));
      double worst_z = 0.0;
      Json inc = Json::array();
      for (std::size_t k = 0; k < lags.size(); ++k) {
        const double dt = grid.time(mid + lags[k]) - grid.time(mid);
        const double ref = increment_variance(model, grid.time(mid), grid.time(mid + lags[k]));
        const double z = (s.increment[k].mean - ref) / s.increment[k].standard_error;
        worst_z = std::max(worst_z, std::abs(z));
        report.table.add({h, name, std::string("increment_variance"), static_cast<std::int64_t>(lags[k]),
                          s.increment[k].mean, s.increment[k].standard_error, ref, z});
        inc.push_back({{"lag", lags[k]}, {"dt", dt}, {"estimate", s.increment[k].mean},
                       {"se", s.increment[k].standard_error}, {"reference", ref}});
      }
      report.check(fmt("increment_variance_H%g_", h) + name, worst_z <= 5.0,
                   fmt("largest |z| over lags %.3f (limit 5)", worst_z));
      report.results.push_back({{"hurst", h},
                                {"sampler", name},
                                {"terminal_variance", detail::summary_json(s.terminal)},
                                {"terminal_reference", terminal_variance},
                                {"terminal_ks", s.ks},
                                {"increments", inc}});
    }
    if (stats.size() == 2) {
      const Summary& a = stats[0].second.terminal;
      const Summary& b = stats[1].second.terminal;
      const double joint = std::sqrt(a.standard_error * a.standard_error + b.standard_error * b.standard_error);
      const double z = (a.mean - b.mean) / joint;
      report.check(fmt("sampler_terminal_agreement_H%g", h), std::abs(z) <= 5.0,
                   fmt("cholesky %.6f vs circulant %.6f, z = %.3f", a.mean, b.mean, z));
      report.table.add({h, std::string("both"), std::string("terminal_difference"), std::int64_t{0}, a.mean - b.mean,
                        joint, 0.0, z});
    }
  }
  report.provenance["circulant_fallback"] = fallback;
  report.provenance["hurst_sweep"] = hursts;
  return report;
}

}  // namespace roughop
