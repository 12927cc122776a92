#include "roughop/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "roughop/errors.hpp"
#include "roughop/parallel.hpp"
#include "roughop/quadrature.hpp"
#include "roughop/rng.hpp"
#include "roughop/stats.hpp"

namespace roughop {

PathEnsemble sample_ensemble(const GramContext& ctx, std::size_t m, std::uint64_t seed,
                             const SamplingOptions& options) {
  if (m == 0) throw DomainError("ensemble needs at least one path");
  const auto n = static_cast<Eigen::Index>(ctx.dim());
  PathEnsemble out;
  out.seed = seed;
  out.model = describe(ctx.model());
  out.paths.resize(static_cast<Eigen::Index>(m), n);
  const Eigen::MatrixXd upper = ctx.chol().transpose();
  const std::size_t chunks = (m + kPathsPerStream - 1) / kPathsPerStream;
  parallel_for(chunks, options.workers, [&](std::size_t chunk) {
    const std::size_t r0 = chunk * kPathsPerStream;
    const std::size_t rows = std::min(kPathsPerStream, m - r0);
    RngStream rng(seed, options.stream_base + chunk);
    RowMatrix z(static_cast<Eigen::Index>(rows), n);
    rng.fill_normal({z.data(), static_cast<std::size_t>(z.size())});
    out.paths.middleRows(static_cast<Eigen::Index>(r0), static_cast<Eigen::Index>(rows)).noalias() =
        z * upper.triangularView<Eigen::Upper>();
  });
  return out;
}

PathEnsemble sample_component_ensemble(const CovarianceModel& mixed, const TimeGrid& grid, std::size_t m,
                                       std::uint64_t seed, const SamplingOptions& options) {
  if (mixed.kind() != ModelKind::mixed) throw DomainError("component sampling requires a mixed model");
  const GramContext bm(CovarianceModel::brownian(), grid);
  const GramContext fbm(CovarianceModel::fractional(HurstParameter(mixed.hurst())), grid);
  const PathEnsemble b = sample_ensemble(bm, m, seed, {options.workers, options.stream_base});
  const PathEnsemble f = sample_ensemble(fbm, m, seed, {options.workers, options.stream_base + kFractionalStreamBase});
  const auto n = static_cast<Eigen::Index>(grid.size());
  PathEnsemble out;
  out.seed = seed;
  out.model = describe(mixed) + " components";
  out.paths.resize(static_cast<Eigen::Index>(m), 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.paths.col(2 * i) = b.paths.col(i);
    out.paths.col(2 * i + 1) = f.paths.col(i);
  }
  return out;
}

double isonormal(const CMElement& h, std::span<const double> path) {
  if (h.size() != path.size()) throw DimensionError("isonormal: element and path sizes differ");
  const Eigen::Map<const Eigen::VectorXd> x(path.data(), static_cast<Eigen::Index>(path.size()));
  return h.coeffs().dot(x);
}

Eigen::VectorXd ConditionalLaw::mean(std::span<const double> prefix) const {
  if (prefix.size() != observed) throw DimensionError("conditional mean: prefix length differs from observed count");
  if (observed == 0) return Eigen::VectorXd::Zero(mean_map.rows());
  const Eigen::Map<const Eigen::VectorXd> x(prefix.data(), static_cast<Eigen::Index>(prefix.size()));
  return mean_map * x;
}

ConditionalLaw conditional_law(const GramContext& ctx, AdaptedIndex j) {
  const std::size_t n = ctx.dim();
  if (j.j >= n) throw DomainError("conditional_law needs 0 <= j < N");
  const auto p = static_cast<Eigen::Index>(j.j);
  const auto f = static_cast<Eigen::Index>(n - j.j);
  ConditionalLaw law;
  law.observed = j.j;
  const Eigen::MatrixXd& sigma = ctx.sigma();
  if (p == 0) {
    law.mean_map = Eigen::MatrixXd::Zero(f, 0);
    law.covariance = sigma;
    return law;
  }
  // B = Sigma_pp^{-1} Sigma_pf, mean map = B^T, covariance = Sigma_ff - Sigma_fp B.
  const Eigen::MatrixXd b = ctx.solve_leading(j.j, sigma.topRightCorner(p, f));
  law.mean_map = b.transpose();
  Eigen::MatrixXd cov = sigma.bottomRightCorner(f, f) - sigma.bottomLeftCorner(f, p) * b;
  law.covariance = 0.5 * (cov + cov.transpose());
  return law;
}

Eigen::MatrixXd whitening_factor(const Eigen::MatrixXd& covariance) {
  const Eigen::Index k = covariance.rows();
  if (k == 0) return Eigen::MatrixXd(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
  const double trace = std::max(covariance.trace(), 0.0);
  const double cutoff = 1e-14 * trace;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (eig.eigenvalues()[i] > cutoff && eig.eigenvalues()[i] > 0.0) keep.push_back(i);
  }
  Eigen::MatrixXd factor(k, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    factor.col(static_cast<Eigen::Index>(c)) =
        eig.eigenvectors().col(keep[c]) * std::sqrt(eig.eigenvalues()[keep[c]]);
  }
  return factor;
}

double gaussian_expectation(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor, const SmoothMap& g,
                            std::size_t nodes) {
  const Eigen::Index dims = factor.cols();
  std::vector<double> x(static_cast<std::size_t>(mean.size()));
  if (dims == 0) {
    for (Eigen::Index i = 0; i < mean.size(); ++i) x[static_cast<std::size_t>(i)] = mean[i];
    return g(x);
  }
  if (static_cast<std::size_t>(dims) > kMaxQuadratureDims) {
    throw UnsupportedError("tensor quadrature limited to 4 dimensions; use Monte Carlo");
  }
  const GaussHermiteRule& rule = gauss_hermite(nodes);
  std::vector<std::size_t> counter(static_cast<std::size_t>(dims), 0);
  Eigen::VectorXd z(dims);
  double total = 0.0;
  while (true) {
    double weight = 1.0;
    for (Eigen::Index d = 0; d < dims; ++d) {
      z[d] = rule.nodes[counter[static_cast<std::size_t>(d)]];
      weight *= rule.weights[counter[static_cast<std::size_t>(d)]];
    }
    const Eigen::VectorXd point = mean + factor * z;
    for (Eigen::Index i = 0; i < point.size(); ++i) x[static_cast<std::size_t>(i)] = point[i];
    total += weight * g(x);
    std::size_t d = 0;
    while (d < counter.size() && ++counter[d] == nodes) counter[d++] = 0;
    if (d == counter.size()) break;
  }
  return total;
}

Estimate conditional_expectation(const GramContext& ctx, const SmoothMap& g, std::span<const std::size_t> indices,
                                 AdaptedIndex j, std::span<const double> prefix, const ExpectationMethod& method) {
  const std::size_t n = ctx.dim();
  if (j.j > n) throw DomainError("adapted index beyond grid size");
  if (prefix.size() != j.j) throw DimensionError("prefix length must equal the adapted index");
  for (std::size_t idx : indices) {
    if (idx < 1 || idx > n) throw DomainError("functional index out of range");
  }
  const auto k = static_cast<Eigen::Index>(indices.size());
  std::vector<Eigen::Index> future;
  for (Eigen::Index a = 0; a < k; ++a) {
    if (indices[static_cast<std::size_t>(a)] > j.j) future.push_back(a);
  }
  Eigen::VectorXd mean(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    const std::size_t idx = indices[static_cast<std::size_t>(a)];
    mean[a] = idx <= j.j ? prefix[idx - 1] : 0.0;
  }
  Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(k, 0);
  if (!future.empty()) {
    const auto fk = static_cast<Eigen::Index>(future.size());
    const auto p = static_cast<Eigen::Index>(j.j);
    const Eigen::MatrixXd& sigma = ctx.sigma();
    Eigen::MatrixXd cross(p, fk);   // Sigma_{prefix, future}
    Eigen::MatrixXd block(fk, fk);  // Sigma_{future, future}
    for (Eigen::Index a = 0; a < fk; ++a) {
      const auto ia = static_cast<Eigen::Index>(indices[static_cast<std::size_t>(future[a])] - 1);
      for (Eigen::Index r = 0; r < p; ++r) cross(r, a) = sigma(r, ia);
      for (Eigen::Index b = 0; b < fk; ++b) {
        block(a, b) = sigma(ia, static_cast<Eigen::Index>(indices[static_cast<std::size_t>(future[b])] - 1));
      }
    }
    Eigen::MatrixXd cov = block;
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(fk);
    if (p > 0) {
      const Eigen::MatrixXd b = ctx.solve_leading(j.j, cross);
      const Eigen::Map<const Eigen::VectorXd> x(prefix.data(), p);
      mu = b.transpose() * x;
      cov -= cross.transpose() * b;
      cov = 0.5 * (cov + cov.transpose());
    }
    const Eigen::MatrixXd w = whitening_factor(cov);
    factor = Eigen::MatrixXd::Zero(k, w.cols());
    for (Eigen::Index a = 0; a < fk; ++a) {
      mean[future[a]] = mu[a];
      factor.row(future[a]) = w.row(a);
    }
  }

  if (method.kind == ExpectationMethod::Kind::quadrature || factor.cols() == 0) {
    if (static_cast<std::size_t>(factor.cols()) > kMaxQuadratureDims) {
      throw UnsupportedError("quadrature requested with " + std::to_string(factor.cols()) +
                             " future dimensions (limit 4); use the Monte Carlo method");
    }
    return {gaussian_expectation(mean, factor, g, method.kind == ExpectationMethod::Kind::quadrature
                                                      ? method.nodes
                                                      : kDefaultHermiteNodes),
            0.0};
  }

  if (method.samples < 2) throw DomainError("Monte Carlo conditional expectation needs at least 2 samples");
  RngStream rng(method.seed, method.stream);
  std::vector<double> values(method.samples);
  std::vector<double> x(static_cast<std::size_t>(k));
  Eigen::VectorXd z(factor.cols());
  for (std::size_t s = 0; s < method.samples; ++s) {
    for (Eigen::Index d = 0; d < z.size(); ++d) z[d] = rng.normal();
    const Eigen::VectorXd point = mean + factor * z;
    for (Eigen::Index i = 0; i < k; ++i) x[static_cast<std::size_t>(i)] = point[i];
    values[s] = g(x);
  }
  const Summary s = summarize(values);
  return {s.mean, s.standard_error};
}

}  // namespace roughop
