#include <cmath>

#include "experiment_common.hpp"
#include "roughop/functional.hpp"
#include "roughop/malliavin.hpp"
#include "roughop/rng.hpp"
#include "test_fields.hpp"

namespace roughop {

using detail::fmt;

namespace {

struct Factorization {
  Summary residual;
  double expected = 0.0;
};

Factorization factorize(const GramContext& ctx, const CylindricalFunctional& f, const PathEnsemble& paths,
                        const ExpectationMethod& method, std::size_t workers) {
  const AdaptedVectorField u = clark_integrand(ctx, f, {method});
  Factorization out;
  out.expected = conditional_functional_mean(ctx, f, AdaptedIndex(0), {}, method);
  std::vector<double> sq(paths.size());
  detail::map_paths(paths.size(), workers, [&](std::size_t r) {
    const auto x = paths.path(r);
    const double res = f.evaluate(x) - out.expected - divergence(u, x);
    sq[r] = res * res;
  });
  out.residual = summarize(sq);
  return out;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

Report run_mixed(const ExperimentConfig& cfg, const RunOptions& options) {
  const std::size_t n = cfg.grid_n;
  const std::size_t m = cfg.paths;
  const double h = cfg.hurst;
  const double alpha = cfg.alpha;
  const double beta = cfg.beta;
  const TimeGrid grid = detail::experiment_grid(cfg, n);
  Report report = detail::make_report(cfg, cfg.scope, "mixed", h, n);
  report.table.columns = {"case", "alpha", "beta", "quantity", "estimate", "se", "reference", "reference_se"};

  const CovarianceModel model = CovarianceModel::mixed(alpha, beta, HurstParameter(h));
  const GramContext comp = GramContext::components(model, grid);
  const CylindricalFunctional base = make_functional(cfg.functional, grid, &report.warnings);
  const PathEnsemble paths = sample_component_ensemble(model, grid, m, cfg.seed, {options.workers, 0});

  // Direct-sum energy norm: |(u, v)|^2 = |u|_B^2 + |v|_H^2.
  {
    const GramContext bm(CovarianceModel::brownian(), grid);
    const GramContext fbm(CovarianceModel::fractional(HurstParameter(h)), grid);
    RngStream rng(cfg.seed, 0x6d697800ULL);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      CMElement joint = CMElement::zero(2 * n), ub = CMElement::zero(n), vh = CMElement::zero(n);
      for (std::size_t i = 0; i < n; ++i) {
        ub.coeffs()[static_cast<Eigen::Index>(i)] = rng.normal();
        vh.coeffs()[static_cast<Eigen::Index>(i)] = rng.normal();
        joint.coeffs()[static_cast<Eigen::Index>(2 * i)] = ub.coeffs()[static_cast<Eigen::Index>(i)];
        joint.coeffs()[static_cast<Eigen::Index>(2 * i + 1)] = vh.coeffs()[static_cast<Eigen::Index>(i)];
      }
      const double a = norm_squared(comp, joint);
      const double b = norm_squared(bm, ub) + norm_squared(fbm, vh);
      worst = std::max(worst, std::abs(a - b) / b);
    }
    report.check("direct_sum_norm", worst <= 1e-12, fmt("max relative error %.3e", worst));
    report.results.push_back({{"quantity", "direct_sum_norm"}, {"max_relative_error", worst}});
  }

  // Componentwise adjointness and factorization at the configured weights.
  {
    const CylindricalFunctional f = lift_to_components(base, alpha, beta);
    std::vector<VectorField> us;
    for (const std::string& kind : cfg.fields) us.push_back(detail::make_test_field(comp, kind, cfg.seed, 7));
    const std::size_t nu = us.size();
    std::vector<std::vector<double>> lhs(nu, std::vector<double>(m)), rhs = lhs;
    detail::map_paths(m, options.workers, [&](std::size_t r) {
      const auto x = paths.path(r);
      const double fv = f.evaluate(x);
      const CMElement df = derivative(f, x);
      for (std::size_t b = 0; b < nu; ++b) {
        lhs[b][r] = fv * divergence(us[b], x);
        rhs[b][r] = pairing(us[b], x, df);
      }
    });
    Json adj = Json::array();
    for (std::size_t b = 0; b < nu; ++b) {
      const Summary d = summarize_difference(lhs[b], rhs[b]);
      const bool ok = std::abs(d.mean) <= 3.0 * d.standard_error;
      report.table.add({std::string("configured"), alpha, beta, "adjoint_" + cfg.fields[b], d.mean, d.standard_error,
                        0.0, 0.0});
      adj.push_back({{"field", cfg.fields[b]}, {"difference", d.mean}, {"se", d.standard_error}, {"passed", ok}});
      report.check("adjoint_" + cfg.fields[b], ok, fmt("difference %.4g, se %.4g", d.mean, d.standard_error));
    }
    const Factorization fac = factorize(comp, f, paths, cfg.method, options.workers);
    report.table.add({std::string("configured"), alpha, beta, std::string("residual"), fac.residual.mean,
                      fac.residual.standard_error, 0.0, 0.0});
    report.results.push_back({{"case", "configured"},
                              {"alpha", alpha},
                              {"beta", beta},
                              {"adjointness", adj},
                              {"residual", detail::summary_json(fac.residual)},
                              {"expected_value", fac.expected}});
  }

  // beta = 0: the Brownian coordinates are the pure Brownian ensemble, so estimates coincide.
  {
    const CovarianceModel degenerate = CovarianceModel::mixed(1.0, 0.0, HurstParameter(h));
    const GramContext bm(CovarianceModel::brownian(), grid);
    const PathEnsemble pure = sample_ensemble(bm, m, cfg.seed, {options.workers, 0});
    const Factorization a = factorize(comp, lift_to_components(base, 1.0, 0.0), paths, cfg.method, options.workers);
    const Factorization b = factorize(bm, base, pure, cfg.method, options.workers);
    const bool ok = close(a.residual.mean, b.residual.mean) && close(a.expected, b.expected);
    report.table.add({std::string("beta_zero"), 1.0, 0.0, std::string("residual"), a.residual.mean,
                      a.residual.standard_error, b.residual.mean, b.residual.standard_error});
    report.check("beta_zero_matches_brownian", ok,
                 fmt("residual %.17g vs %.17g", a.residual.mean, b.residual.mean));
    const CylindricalFunctional lin = make_functional("linear", grid, &report.warnings);
    const Factorization e = factorize(comp, lift_to_components(lin, 1.0, 0.0), paths, cfg.method, options.workers);
    report.check("beta_zero_linear_exact", e.residual.mean <= 1e-20, fmt("residual %.3e", e.residual.mean));
    report.results.push_back({{"case", "beta_zero"},
                              {"model", describe(degenerate)},
                              {"residual", detail::summary_json(a.residual)},
                              {"pure_residual", detail::summary_json(b.residual)},
                              {"expected_value", a.expected},
                              {"pure_expected_value", b.expected},
                              {"linear_residual", e.residual.mean}});
  }

  // alpha = 0: compared with the pure fractional pipeline, which draws its own paths.
  {
    const GramContext fbm(CovarianceModel::fractional(HurstParameter(h)), grid);
    const PathEnsemble pure = sample_ensemble(fbm, m, cfg.seed, {options.workers, 0});
    const Factorization a = factorize(comp, lift_to_components(base, 0.0, 1.0), paths, cfg.method, options.workers);
    const Factorization b = factorize(fbm, base, pure, cfg.method, options.workers);
    const bool ok = detail::within_se(a.residual.mean, a.residual.standard_error, b.residual.mean,
                                      b.residual.standard_error, 3.0) &&
                    close(a.expected, b.expected);
    report.table.add({std::string("alpha_zero"), 0.0, 1.0, std::string("residual"), a.residual.mean,
                      a.residual.standard_error, b.residual.mean, b.residual.standard_error});
    report.check("alpha_zero_matches_fractional", ok,
                 fmt("residual %.5g vs %.5g, combined se %.3g", a.residual.mean, b.residual.mean,
                     std::hypot(a.residual.standard_error, b.residual.standard_error)));
    report.results.push_back({{"case", "alpha_zero"},
                              {"residual", detail::summary_json(a.residual)},
                              {"pure_residual", detail::summary_json(b.residual)},
                              {"expected_value", a.expected},
                              {"pure_expected_value", b.expected}});
  }
  report.provenance["jitter"] = comp.jitter();
  return report;
}

}  // namespace roughop
