#include <cmath>

#include "experiment_common.hpp"
#include "roughop/errors.hpp"
#include "roughop/functional.hpp"
#include "roughop/malliavin.hpp"

namespace roughop {

using detail::fmt;

Report run_factorization(const ExperimentConfig& cfg, const RunOptions& options) {
  const std::size_t m = cfg.paths;
  const double h = cfg.model == "bm" ? 0.5 : cfg.hurst;
  if (cfg.grid_sweep.empty()) throw ConfigError("grid_sweep is empty");
  Report report = detail::make_report(cfg, cfg.scope, cfg.model, h, cfg.grid_sweep.back());
  report.table.columns = {"grid_n", "residual", "se", "jitter"};
  const bool exact_case = cfg.functional == "linear";

  std::vector<double> residuals;
  for (std::size_t n : cfg.grid_sweep) {
    const TimeGrid grid = detail::experiment_grid(cfg, n);
    const GramContext ctx(cfg.covariance_model(h), grid);
    const CylindricalFunctional f = make_functional(cfg.functional, grid, &report.warnings);
    const AdaptedVectorField u = clark_integrand(ctx, f, {cfg.method});
    const double mean_f = conditional_functional_mean(ctx, f, AdaptedIndex(0), {}, cfg.method);
    const PathEnsemble paths = sample_ensemble(ctx, m, cfg.seed, {options.workers, 0});

    std::vector<double> sq(m), res(m), fv(m), corr(m);
    detail::map_paths(m, options.workers, [&](std::size_t r) {
      const auto x = paths.path(r);
      const DivergenceTerms t = divergence_terms(u, x);
      fv[r] = f.evaluate(x);
      res[r] = fv[r] - mean_f - t.value();
      sq[r] = res[r] * res[r];
      corr[r] = std::abs(t.correction);
    });
    const Summary s = summarize(sq);
    const Summary sr = summarize(res);
    const Summary sf = summarize(fv);
    const double max_corr = *std::max_element(corr.begin(), corr.end());
    const double pred = predictability_deviation(u, paths.path(0), cfg.seed);
    residuals.push_back(s.mean);
    report.table.add({static_cast<std::int64_t>(n), s.mean, s.standard_error, ctx.jitter()});
    report.results.push_back({{"grid_n", n},
                              {"residual", s.mean},
                              {"se", s.standard_error},
                              {"residual_mean", detail::summary_json(sr)},
                              {"expected_value", mean_f},
                              {"sample_mean", detail::summary_json(sf)},
                              {"max_abs_correction", max_corr},
                              {"predictability_deviation", pred},
                              {"finite_difference_jacobian", u.finite_difference()},
                              {"jitter", ctx.jitter()}});
    report.check(fmt("predictable_N%g", static_cast<double>(n)), pred == 0.0,
                 fmt("max coefficient change under future resampling %.3e", pred));
    if (exact_case)
      report.check(fmt("exact_residual_N%g", static_cast<double>(n)), s.mean <= 1e-20,
                   fmt("residual %.3e (tolerance 1e-20)", s.mean));
  }

  bool decreasing = true;
  for (std::size_t k = 1; k < residuals.size(); ++k) decreasing = decreasing && residuals[k] < residuals[k - 1];
  report.provenance["method"] = cfg.method.kind == ExpectationMethod::Kind::quadrature ? "quadrature" : "mc";
  report.provenance["strictly_decreasing"] = decreasing;
  if (!exact_case && residuals.size() >= 2) {
    report.check("residual_strictly_decreasing", decreasing, "residual sequence over the grid sweep");
    const double ratio = residuals.back() / residuals.front();
    report.check("residual_halved", ratio < 0.5,
                 fmt("residual(%g) / residual(%g) = %.4f", static_cast<double>(cfg.grid_sweep.back()),
                     static_cast<double>(cfg.grid_sweep.front()), ratio));
  }
  return report;
}

}  // namespace roughop
