#include <cmath>

#include "experiment_common.hpp"
#include "roughop/errors.hpp"
#include "roughop/functional.hpp"
#include "roughop/malliavin.hpp"

namespace roughop {

using detail::fmt;

namespace {

// <P_s k_c, k_t - k_s> for every coordinate c the functional reads.
Eigen::VectorXd projected_pairing(const GramContext& ctx, const CylindricalFunctional& f, std::size_t js,
                                  std::size_t jt) {
  const auto& idx = f.indices();
  const CMElement inc = increment_element(ctx, js, jt);
  Eigen::VectorXd w(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c)
    w[static_cast<Eigen::Index>(c)] =
        inner_product(ctx, project_adapted(ctx, representer(ctx, idx[c]), AdaptedIndex(js)), inc);
  return w;
}

}  // namespace

Report run_remainder_scaling(const ExperimentConfig& cfg, const RunOptions& options) {
  const std::size_t n = cfg.grid_n;
  const std::size_t m = cfg.paths;
  const double h = cfg.model == "bm" ? 0.5 : cfg.hurst;
  const TimeGrid grid = detail::experiment_grid(cfg, n);
  const double horizon = cfg.horizon;
  const auto js_opt = grid.find_index(0.5 * horizon);
  if (!js_opt) throw ConfigError("remainder scaling needs T/2 on the grid (even grid_n)");
  const std::size_t js = *js_opt;
  const double s = grid.time(js);

  std::vector<std::size_t> targets;
  std::vector<double> offsets;
  for (std::size_t k = 1; k <= cfg.offsets; ++k) {
    const double off = 0.5 * horizon * std::ldexp(1.0, -static_cast<int>(k));
    const auto jt = grid.find_index(s + off);
    if (!jt) continue;
    targets.push_back(*jt);
    offsets.push_back(grid.time(*jt) - s);
  }
  if (targets.size() < 5)
    throw ConfigError("remainder scaling has " + std::to_string(targets.size()) +
                      " usable dyadic offsets on this grid; at least 5 are required");

  Report report = detail::make_report(cfg, cfg.scope, cfg.model, h, n);
  report.table.columns = {"offset", "grid_offset", "e_r_sq", "se", "e_r", "e_r_se", "increment_norm_sq",
                          "reference_norm_sq"};

  const GramContext ctx(cfg.covariance_model(h), grid);
  const CylindricalFunctional f = make_functional(cfg.functional, grid, &report.warnings);
  const FeatureConditioning cond_s(ctx, f, AdaptedIndex(js), cfg.method);
  std::vector<FeatureConditioning> cond_t;
  std::vector<Eigen::VectorXd> pair_t;
  double worst_norm = 0.0;
  std::vector<double> norm_sq;
  for (std::size_t jt : targets) {
    cond_t.emplace_back(ctx, f, AdaptedIndex(jt), cfg.method);
    pair_t.push_back(projected_pairing(ctx, f, js, jt));
    const double nsq = norm_squared(ctx, increment_element(ctx, js, jt));
    const double ref = increment_variance(ctx.model(), s, grid.time(jt));
    norm_sq.push_back(nsq);
    worst_norm = std::max(worst_norm, std::abs(nsq - ref) / ref);
  }
  const Eigen::MatrixXd w = f.mixing();
  const PathEnsemble paths = sample_ensemble(ctx, m, cfg.seed, {options.workers, 0});
  const std::size_t k = targets.size();
  std::vector<std::vector<double>> r(k, std::vector<double>(m)), rsq = r;

  detail::map_paths(m, options.workers, [&](std::size_t p) {
    const auto x = paths.path(p);
    const double ms = cond_s.expected_value(x.first(js));
    const Eigen::VectorXd g = w.transpose() * cond_s.expected_gradient(x.first(js));
    for (std::size_t i = 0; i < k; ++i) {
      const double mt = cond_t[i].expected_value(x.first(targets[i]));
      const double rem = mt - ms - g.dot(pair_t[i]);
      r[i][p] = rem;
      rsq[i][p] = rem * rem;
    }
  });

  std::vector<double> lx, ly;
  Json rows = Json::array();
  for (std::size_t i = 0; i < k; ++i) {
    const Summary sq = summarize(rsq[i]);
    const Summary sr = summarize(r[i]);
    const double ref = std::pow(offsets[i], 2.0 * h);
    report.table.add({offsets[i], static_cast<std::int64_t>(targets[i] - js), sq.mean, sq.standard_error, sr.mean,
                      sr.standard_error, norm_sq[i], ref});
    rows.push_back({{"offset", offsets[i]},
                    {"e_r_sq", detail::summary_json(sq)},
                    {"e_r", detail::summary_json(sr)},
                    {"increment_norm_sq", norm_sq[i]},
                    {"reference_norm_sq", ref}});
    lx.push_back(std::log(offsets[i]));
    ly.push_back(std::log(sq.mean));
  }
  const LinearFit fit = fit_line(lx, ly);
  const bool finite = std::isfinite(fit.slope);
  report.results.push_back({{"s", s}, {"offsets", rows}});
  report.results.push_back({{"fit",
                             {{"slope", fit.slope},
                              {"intercept", fit.intercept},
                              {"r_squared", fit.r_squared},
                              {"reference_exponent", 4.0 * h},
                              {"slope_minus_reference", fit.slope - 4.0 * h},
                              {"usable_offsets", k}}}});
  report.check("increment_norm_identity", worst_norm <= 1e-12,
               fmt("max relative |k_t - k_s|^2 error %.3e", worst_norm));
  report.check("fit_r_squared", finite && fit.r_squared >= 0.98,
               fmt("log-log fit R^2 %.5f, slope %.4f (reference 4H = %.3f)", fit.r_squared, fit.slope, 4.0 * h));
  report.provenance["jitter"] = ctx.jitter();
  return report;
}

}  // namespace roughop
