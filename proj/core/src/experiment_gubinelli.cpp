#include <cmath>

#include "experiment_common.hpp"
#include "roughop/errors.hpp"
#include "roughop/functional.hpp"
#include "roughop/malliavin.hpp"

namespace roughop {

using detail::fmt;

namespace {

double relative_l2(const std::vector<double>& pred, const std::vector<double>& target) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    num += (pred[i] - target[i]) * (pred[i] - target[i]);
    den += target[i] * target[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace

Report run_gubinelli_compare(const ExperimentConfig& cfg, const RunOptions& options) {
  const std::size_t n = cfg.grid_n;
  const std::size_t m = cfg.paths;
  const std::size_t k = cfg.regression_offsets;
  if (k < 1) throw ConfigError("regression_offsets must be at least 1");
  const double h = cfg.model == "bm" ? 0.5 : cfg.hurst;
  const TimeGrid grid = detail::experiment_grid(cfg, n);
  const GramContext ctx(cfg.covariance_model(h), grid);
  Report report = detail::make_report(cfg, cfg.scope, cfg.model, h, n);
  report.table.columns = {"s",           "correlation",      "rel_err_pairing_slope", "rel_err_regression",
                          "rel_err_literal", "mean_abs_literal", "mean_slope",         "mean_regression"};
  const CylindricalFunctional f = make_functional(cfg.functional, grid, &report.warnings);
  const Eigen::MatrixXd w = f.mixing();
  const auto& idx = f.indices();
  const PathEnsemble paths = sample_ensemble(ctx, m, cfg.seed, {options.workers, 0});
  const bool brownian_linear = cfg.functional == "linear" && h == 0.5;

  for (double frac : cfg.s_points) {
    const std::size_t js = grid.nearest_index(frac * cfg.horizon);
    if (js < 1 || js + k > n) throw ConfigError(fmt("s = %g T leaves too few offsets on the grid", frac));
    const double s = grid.time(js);
    const FeatureConditioning cond_s(ctx, f, AdaptedIndex(js), cfg.method);
    std::vector<FeatureConditioning> cond_t;
    Eigen::MatrixXd literal(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(k));
    Eigen::MatrixXd slope = literal;
    for (std::size_t l = 1; l <= k; ++l) {
      cond_t.emplace_back(ctx, f, AdaptedIndex(js + l), cfg.method);
      const CMElement inc = increment_element(ctx, js, js + l);
      const double nsq = norm_squared(ctx, inc);
      for (std::size_t c = 0; c < idx.size(); ++c) {
        const CMElement kc = representer(ctx, idx[c]);
        const auto ci = static_cast<Eigen::Index>(c);
        const auto li = static_cast<Eigen::Index>(l - 1);
        literal(ci, li) = inner_product(ctx, project_adapted(ctx, kc, AdaptedIndex(js)), inc);
        slope(ci, li) = inner_product(ctx, kc, inc) / nsq;
      }
    }

    std::vector<double> dm(m * k), pa(m * k), pb(m * k), pc(m * k), ys(m), gs(m);
    detail::map_paths(m, options.workers, [&](std::size_t p) {
      const auto x = paths.path(p);
      const double ms = cond_s.expected_value(x.first(js));
      const Eigen::VectorXd g = w.transpose() * cond_s.expected_gradient(x.first(js));
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        const double dx = x[js + l] - x[js - 1];
        const double d = cond_t[l].expected_value(x.first(js + l + 1)) - ms;
        const double y = g.dot(slope.col(static_cast<Eigen::Index>(l)));
        dm[p * k + l] = d;
        pa[p * k + l] = y * dx;
        pc[p * k + l] = g.dot(literal.col(static_cast<Eigen::Index>(l)));
        sxy += d * dx;
        sxx += dx * dx;
        if (l == 0) ys[p] = y;
      }
      const double gamma = sxy / sxx;
      gs[p] = gamma;
      for (std::size_t l = 0; l < k; ++l) pb[p * k + l] = gamma * (x[js + l] - x[js - 1]);
    });

    const double corr = correlation(pa, pb);
    const double ea = relative_l2(pa, dm), eb = relative_l2(pb, dm), ec = relative_l2(pc, dm);
    double lit = 0.0, worst_gap = 0.0;
    for (double v : pc) lit += std::abs(v);
    lit /= static_cast<double>(pc.size());
    for (std::size_t p = 0; p < m; ++p) worst_gap = std::max(worst_gap, std::abs(ys[p] - gs[p]));
    const Summary sy = summarize(ys), sg = summarize(gs);
    report.table.add({s, corr, ea, eb, ec, lit, sy.mean, sg.mean});
    report.results.push_back({{"s", s},
                              {"offsets", k},
                              {"correlation", corr},
                              {"relative_l2_pairing_slope", ea},
                              {"relative_l2_regression", eb},
                              {"relative_l2_literal_pairing", ec},
                              {"mean_abs_literal_pairing", lit},
                              {"pairing_slope", detail::summary_json(sy)},
                              {"regression_slope", detail::summary_json(sg)},
                              {"max_slope_gap", worst_gap}});
    if (brownian_linear)
      report.check(fmt("slope_matches_regression_s%g", s), worst_gap <= 1e-8,
                   fmt("max |y'_s - gamma_s| %.3e", worst_gap));
  }
  return report;
}

}  // namespace roughop
