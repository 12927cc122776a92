#include <cmath>

#include "experiment_common.hpp"
#include "roughop/malliavin.hpp"
#include "test_fields.hpp"

namespace roughop {

using detail::fmt;

namespace {

struct DefectCase {
  std::string name;
  double hurst;
  VectorField field;
  double closed_form;
};

}  // namespace

Report run_isometry_defect(const ExperimentConfig& cfg, const RunOptions& options) {
  const std::size_t n = cfg.grid_n;
  const std::size_t m = cfg.paths;
  const TimeGrid grid = detail::experiment_grid(cfg, n);
  const double h = cfg.model == "bm" ? 0.5 : cfg.hurst;
  Report report = detail::make_report(cfg, cfg.scope, cfg.model, h, n);
  report.table.columns = {"field", "hurst", "e_delta_sq", "e_norm_sq", "defect", "se", "closed_form", "z"};

  const GramContext ctx(cfg.covariance_model(h), grid);
  const GramContext bm(CovarianceModel::brownian(), grid);
  const auto nn = static_cast<Eigen::Index>(n);

  std::vector<DefectCase> cases;
  cases.push_back({"deterministic", h, detail::make_test_field(ctx, "deterministic", cfg.seed, 0), 0.0});
  {
    // u = X_T k_T: delta(u) = X_T^2 - Sigma_TT, defect Sigma_TT^2.
    Eigen::MatrixXd dir = Eigen::MatrixXd::Zero(nn, 1);
    dir(nn - 1, 0) = 1.0;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(1, nn);
    q(0, nn - 1) = 1.0;
    VectorField u = VectorField::affine(ctx, dir, Eigen::VectorXd::Zero(1), q);
    cases.push_back({"terminal_square", h, u, detail::affine_defect(q, u.gram_directions())});
  }
  for (const char* kind : {"adapted_affine", "nonadapted_affine"}) {
    VectorField u = detail::make_test_field(ctx, kind, cfg.seed, 0);
    Eigen::MatrixXd q(u.slots(), n);
    Eigen::VectorXd a;
    const std::vector<double> zero(n, 0.0);
    u.coefficients_and_jacobian(zero, a, q);
    cases.push_back({kind, h, u, detail::affine_defect(q, u.gram_directions())});
  }
  {
    // a_j = X_{t_{j-1}} along the increments: adapted, with a sizeable defect when H != 1/2.
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(nn, nn);
    std::vector<std::size_t> prefix(n);
    for (Eigen::Index j = 0; j < nn; ++j) {
      if (j > 0) q(j, j - 1) = 1.0;
      prefix[static_cast<std::size_t>(j)] = static_cast<std::size_t>(j);
    }
    VectorField u = VectorField::affine(ctx, increment_directions(n), Eigen::VectorXd::Zero(nn), q, prefix);
    cases.push_back({"adapted_lagged", h, u, detail::affine_defect(q, u.gram_directions())});
  }
  {
    VectorField u = detail::make_test_field(bm, "adapted_affine", cfg.seed, 0);
    Eigen::MatrixXd q;
    Eigen::VectorXd a;
    u.coefficients_and_jacobian(std::vector<double>(n, 0.0), a, q);
    cases.push_back({"adapted_affine_brownian", 0.5, u, detail::affine_defect(q, u.gram_directions())});
  }

  const PathEnsemble rough = sample_ensemble(ctx, m, cfg.seed, {options.workers, 0});
  const PathEnsemble brownian = sample_ensemble(bm, m, cfg.seed, {options.workers, 0});

  for (const DefectCase& c : cases) {
    const PathEnsemble& paths = c.name == "adapted_affine_brownian" ? brownian : rough;
    const Eigen::MatrixXd gram = c.field.directions().transpose() * c.field.gram_directions();
    std::vector<double> dsq(m), nsq(m), dv(m), exact_err(m, 0.0);
    detail::map_paths(m, options.workers, [&](std::size_t r) {
      const auto x = paths.path(r);
      const double d = divergence(c.field, x);
      const Eigen::VectorXd a = c.field.coefficients(x);
      dv[r] = d;
      dsq[r] = d * d;
      nsq[r] = a.dot(gram * a);
      if (c.name == "terminal_square") {
        const double xt = x[n - 1];
        exact_err[r] = std::abs(d - (xt * xt - ctx.sigma()(nn - 1, nn - 1)));
      }
    });
    const Summary sd = summarize(dsq);
    const Summary sn = summarize(nsq);
    const Summary diff = summarize_difference(dsq, nsq);
    const double z = diff.standard_error > 0.0 ? (diff.mean - c.closed_form) / diff.standard_error : 0.0;
    const bool ok = std::abs(diff.mean - c.closed_form) <= 3.0 * diff.standard_error + 1e-12;
    report.table.add({c.name, c.hurst, sd.mean, sn.mean, diff.mean, diff.standard_error, c.closed_form, z});
    Json res{{"field", c.name},
             {"hurst", c.hurst},
             {"e_delta_sq", detail::summary_json(sd)},
             {"e_norm_sq", detail::summary_json(sn)},
             {"defect", diff.mean},
             {"se", diff.standard_error},
             {"closed_form", c.closed_form},
             {"z", z}};
    report.check("defect_" + c.name, ok,
                 fmt("measured %.5g, closed form %.5g, se %.3g", diff.mean, c.closed_form, diff.standard_error));
    const Summary sdiv = summarize(dv);
    report.check("centered_" + c.name, std::abs(sdiv.mean) <= 3.0 * sdiv.standard_error,
                 fmt("mean divergence %.4g, se %.4g", sdiv.mean, sdiv.standard_error));
    if (c.name == "terminal_square") {
      const double worst = *std::max_element(exact_err.begin(), exact_err.end());
      res["max_identity_error"] = worst;
      report.check("terminal_square_identity", worst <= 1e-12,
                   fmt("max |delta - (X_T^2 - Sigma_TT)| %.3e", worst));
      const double var_ref = 2.0 * std::pow(ctx.sigma()(nn - 1, nn - 1), 2.0);
      report.check("terminal_square_variance", std::abs(sd.mean - var_ref) <= 3.0 * sd.standard_error,
                   fmt("E[delta^2] %.5g vs %.5g, se %.3g", sd.mean, var_ref, sd.standard_error));
      res["variance_reference"] = var_ref;
    }
    if (c.name == "adapted_lagged" && c.hurst != 0.5) {
      const bool nonzero = std::abs(diff.mean) > 3.0 * diff.standard_error;
      res["defect_sign"] = diff.mean > 0 ? "positive" : "negative";
      report.check("adapted_defect_nonzero", nonzero,
                   fmt("measured %.5g, |z| against zero %.2f", diff.mean, std::abs(diff.mean) / diff.standard_error));
    }
    report.results.push_back(res);
  }
  return report;
}

}  // namespace roughop
