#include <cmath>

#include "experiment_common.hpp"
#include "roughop/functional.hpp"
#include "roughop/malliavin.hpp"
#include "roughop/rng.hpp"
#include "test_fields.hpp"

namespace roughop {

using detail::fmt;

Report run_adjointness(const ExperimentConfig& cfg, const RunOptions& options) {
  const std::size_t n = cfg.grid_n;
  const std::size_t m = cfg.paths;
  const TimeGrid grid = detail::experiment_grid(cfg, n);
  std::vector<double> hursts = cfg.model == "bm" ? std::vector<double>{0.5} : cfg.hurst_sweep;
  Report report = detail::make_report(cfg, cfg.scope, cfg.model, hursts.front(), n);
  report.table.columns = {"hurst", "functional", "field", "lhs", "rhs", "difference", "se", "z", "passed"};

  for (std::size_t hi = 0; hi < hursts.size(); ++hi) {
    const double h = hursts[hi];
    const GramContext ctx(cfg.covariance_model(h), grid);
    std::vector<CylindricalFunctional> fs;
    for (const std::string& name : cfg.functionals) fs.push_back(make_functional(name, grid, &report.warnings));
    std::vector<VectorField> us;
    for (const std::string& name : cfg.fields) us.push_back(detail::make_test_field(ctx, name, cfg.seed, hi));

    const PathEnsemble paths = sample_ensemble(ctx, m, cfg.seed, {options.workers, 0});
    const std::size_t nf = fs.size(), nu = us.size();
    std::vector<std::vector<double>> lhs(nf * nu, std::vector<double>(m)), rhs = lhs;
    std::vector<std::vector<double>> div(nu, std::vector<double>(m));

    detail::map_paths(m, options.workers, [&](std::size_t r) {
      const auto x = paths.path(r);
      std::vector<double> fv(nf);
      std::vector<CMElement> df(nf);
      for (std::size_t a = 0; a < nf; ++a) {
        fv[a] = fs[a].evaluate(x);
        df[a] = derivative(fs[a], x);
      }
      for (std::size_t b = 0; b < nu; ++b) {
        const double d = divergence(us[b], x);
        div[b][r] = d;
        // <DF, u> = c_DF . (Sigma D a)
        const Eigen::VectorXd su = us[b].gram_directions() * us[b].coefficients(x);
        for (std::size_t a = 0; a < nf; ++a) {
          lhs[a * nu + b][r] = fv[a] * d;
          rhs[a * nu + b][r] = df[a].coeffs().dot(su);
        }
      }
    });

    Json hres = Json::array();
    for (std::size_t b = 0; b < nu; ++b) {
      const Summary s = summarize(div[b]);
      const bool ok = std::abs(s.mean) <= 3.0 * s.standard_error;
      report.check(fmt("centered_H%g_", h) + cfg.fields[b], ok,
                   fmt("mean divergence %.4g, se %.4g", s.mean, s.standard_error));
      hres.push_back({{"field", cfg.fields[b]}, {"divergence", detail::summary_json(s)}, {"centered", ok}});
    }
    for (std::size_t a = 0; a < nf; ++a) {
      for (std::size_t b = 0; b < nu; ++b) {
        const auto& l = lhs[a * nu + b];
        const auto& rr = rhs[a * nu + b];
        const Summary sl = summarize(l);
        const Summary sr = summarize(rr);
        const Summary d = summarize_difference(l, rr);
        const double z = d.standard_error > 0.0 ? d.mean / d.standard_error : 0.0;
        const bool ok = std::abs(d.mean) <= 3.0 * d.standard_error;
        report.table.add({h, cfg.functionals[a], cfg.fields[b], sl.mean, sr.mean, d.mean, d.standard_error, z, ok});
        hres.push_back({{"functional", cfg.functionals[a]},
                        {"field", cfg.fields[b]},
                        {"lhs", detail::summary_json(sl)},
                        {"rhs", detail::summary_json(sr)},
                        {"difference", d.mean},
                        {"se", d.standard_error},
                        {"z", z},
                        {"passed", ok}});
        report.check(fmt("adjoint_H%g_", h) + cfg.functionals[a] + "_" + cfg.fields[b], ok,
                     fmt("E[F delta(u)] - E[<DF,u>] = %.4g, se %.4g, z = %.3f", d.mean, d.standard_error, z));
      }
    }
    report.results.push_back({{"hurst", h}, {"jitter", ctx.jitter()}, {"pairs", hres}});
  }
  return report;
}

}  // namespace roughop
