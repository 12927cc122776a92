#include <cmath>

#include "experiment_common.hpp"
#include "roughop/rng.hpp"

namespace roughop {

using detail::fmt;

namespace {

// Coefficients of E[I(h) | X_1..X_j] read off the Gaussian regression of the
// future coordinates on the observed ones.
CMElement regression_projection(const ConditionalLaw& law, const CMElement& h, std::size_t n) {
  const auto j = static_cast<Eigen::Index>(law.observed);
  CMElement out = CMElement::zero(n);
  out.coeffs().head(j) = h.coeffs().head(j) + law.mean_map.transpose() * h.coeffs().tail(static_cast<Eigen::Index>(n) - j);
  return out;
}

}  // namespace

Report run_projection_lemma(const ExperimentConfig& cfg, const RunOptions&) {
  const std::size_t n = cfg.grid_n;
  const TimeGrid grid = detail::experiment_grid(cfg, n);
  std::vector<double> hursts = cfg.model == "bm" ? std::vector<double>{0.5} : cfg.hurst_sweep;
  Report report = detail::make_report(cfg, cfg.scope, cfg.model, hursts.front(), n);
  report.table.columns = {"hurst", "elements", "max_discrepancy", "max_representer_defect", "jitter"};

  double worst_all = 0.0;
  for (std::size_t hi = 0; hi < hursts.size(); ++hi) {
    const double h = hursts[hi];
    const GramContext ctx(cfg.covariance_model(h), grid);
    std::vector<ConditionalLaw> laws;
    for (std::size_t j = 0; j < n; ++j) laws.push_back(conditional_law(ctx, AdaptedIndex(j)));

    RngStream rng(cfg.seed, 0x6c656d00ULL + hi);
    double worst = 0.0;
    for (std::size_t e = 0; e < cfg.lemma_elements; ++e) {
      CMElement x = CMElement::zero(n);
      rng.fill_normal({x.coeffs().data(), n});
      for (std::size_t j = 0; j <= n; ++j) {
        const CMElement p = project_adapted(ctx, x, AdaptedIndex(j));
        const CMElement q = j < n ? regression_projection(laws[j], x, n) : x;
        worst = std::max(worst, energy_norm(ctx, p - q));
      }
    }
    double rep = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      const CMElement k = representer(ctx, j);
      rep = std::max(rep, energy_norm(ctx, project_adapted(ctx, k, AdaptedIndex(j)) - k));
    }
    worst_all = std::max(worst_all, worst);
    report.table.add({h, static_cast<std::int64_t>(cfg.lemma_elements), worst, rep, ctx.jitter()});
    report.results.push_back({{"hurst", h},
                              {"elements", cfg.lemma_elements},
                              {"prefixes", n + 1},
                              {"max_discrepancy", worst},
                              {"max_representer_defect", rep},
                              {"jitter", ctx.jitter()}});
    report.check(fmt("projection_matches_regression_H%g", h), worst <= 1e-10,
                 fmt("max energy-norm discrepancy %.3e (tolerance 1e-10)", worst));
    report.check(fmt("representer_fixed_H%g", h), rep <= 1e-12, fmt("max |P_j k_j - k_j| %.3e", rep));
  }

  // Brownian reduction: P_j k_T = k_{t_j}.
  {
    const GramContext bm(CovarianceModel::brownian(), grid);
    const CMElement kt = representer(bm, n);
    double worst = 0.0;
    for (std::size_t j = 1; j <= n; ++j)
      worst = std::max(worst, energy_norm(bm, project_adapted(bm, kt, AdaptedIndex(j)) - representer(bm, j)));
    report.results.push_back({{"quantity", "brownian_projection"}, {"max_error", worst}});
    report.check("brownian_projection", worst <= 1e-12, fmt("max |P_j k_T - k_j| %.3e (tolerance 1e-12)", worst));
  }
  report.provenance["max_discrepancy"] = worst_all;
  return report;
}

}  // namespace roughop
