#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "roughop/ensemble_io.hpp"
#include "roughop/errors.hpp"
#include "roughop/gaussian.hpp"
#include "roughop/quadrature.hpp"
#include "roughop/stats.hpp"

using namespace roughop;

namespace {

GramContext fbm_context(double h, std::size_t n) {
  return GramContext(CovarianceModel::fractional(HurstParameter(h)), TimeGrid::uniform(n, 1.0));
}

std::vector<double> column(const PathEnsemble& e, Eigen::Index c) {
  std::vector<double> out(e.size());
  for (std::size_t r = 0; r < e.size(); ++r) out[r] = e.paths(static_cast<Eigen::Index>(r), c);
  return out;
}

}  // namespace

TEST(GaussHermite, ExactForLowMoments) {
  const auto& rule = gauss_hermite(10);
  double m0 = 0, m2 = 0, m4 = 0, m1 = 0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double x = rule.nodes[k], w = rule.weights[k];
    m0 += w;
    m1 += w * x;
    m2 += w * x * x;
    m4 += w * x * x * x * x;
  }
  EXPECT_NEAR(m0, 1.0, 1e-14);
  EXPECT_NEAR(m1, 0.0, 1e-14);
  EXPECT_NEAR(m2, 1.0, 1e-13);
  EXPECT_NEAR(m4, 3.0, 1e-12);
}

TEST(Sampling, MarginalMomentsWithinBands) {
  const auto ctx = fbm_context(0.25, 8);
  const auto e = sample_ensemble(ctx, 20000, 11);
  for (Eigen::Index c = 0; c < 8; ++c) {
    const auto x = column(e, c);
    const auto s = summarize(x);
    const double var = ctx.sigma()(c, c);
    EXPECT_LE(std::abs(s.mean), 4.0 * std::sqrt(var / 20000.0));
    EXPECT_LE(std::abs(s.variance - var), 4.0 * var * std::sqrt(2.0 / 20000.0));
  }
}

TEST(Sampling, DeterministicAcrossWorkerCounts) {
  const auto ctx = fbm_context(0.4, 16);
  SamplingOptions one{1, 0}, three{3, 0};
  const auto a = sample_ensemble(ctx, 1000, 5, one);
  const auto b = sample_ensemble(ctx, 1000, 5, three);
  EXPECT_EQ(a.paths, b.paths);
  const auto c = sample_ensemble_circulant(ctx.model(), ctx.grid(), 1000, 5, one);
  const auto d = sample_ensemble_circulant(ctx.model(), ctx.grid(), 1000, 5, three);
  EXPECT_EQ(c.paths, d.paths);
  const auto other = sample_ensemble(ctx, 1000, 6, one);
  EXPECT_NE(a.paths, other.paths);
}

TEST(Sampling, CirculantTerminalLawPassesKs) {
  for (double h : {0.25, 0.4}) {
    const auto grid = TimeGrid::uniform(64, 1.0);
    const auto e = sample_ensemble_circulant(CovarianceModel::fractional(HurstParameter(h)), grid, 20000, 3);
    EXPECT_TRUE(e.circulant);
    EXPECT_FALSE(e.circulant_fallback);
    const double ks = ks_statistic_normal(column(e, 63), 1.0);
    EXPECT_LE(ks, 1.63 / std::sqrt(20000.0)) << h;
  }
}

TEST(Sampling, CirculantEigenvaluesNonNegativeForFbm) {
  for (double h : {0.1, 0.25, 0.4, 0.5}) {
    const Eigen::VectorXd lam = circulant_eigenvalues(h, 1.0 / 64, 64);
    EXPECT_GE(lam.minCoeff(), -1e-9 * lam.maxCoeff()) << h;
  }
}

TEST(Sampling, ComponentEnsembleReproducesPureSamplers) {
  const auto grid = TimeGrid::uniform(8, 1.0);
  const auto mixed = CovarianceModel::mixed(1.0, 1.0, HurstParameter(0.25));
  const auto comp = sample_component_ensemble(mixed, grid, 600, 9);
  const auto bm = sample_ensemble(GramContext(CovarianceModel::brownian(), grid), 600, 9);
  SamplingOptions frac_opts;
  frac_opts.stream_base = kFractionalStreamBase;
  const auto fbm = sample_ensemble(GramContext(CovarianceModel::fractional(HurstParameter(0.25)), grid), 600, 9,
                                   frac_opts);
  for (Eigen::Index i = 0; i < 8; ++i) {
    EXPECT_EQ(comp.paths.col(2 * i), bm.paths.col(i));
    EXPECT_EQ(comp.paths.col(2 * i + 1), fbm.paths.col(i));
  }
}

TEST(Isonormal, DotProductWithPath) {
  const std::vector<double> path{1.0, -2.0, 0.5};
  EXPECT_DOUBLE_EQ(isonormal(CMElement(Eigen::Vector3d(2.0, 1.0, 4.0)), path), 2.0);
}

TEST(ConditionalExpectation, LinearMapIsRegressionMean) {
  const auto ctx = fbm_context(0.25, 6);
  const std::vector<double> prefix{0.3, -0.1};
  const std::vector<std::size_t> idx{5};
  const auto law = conditional_law(ctx, AdaptedIndex(2));
  const double oracle = law.mean(prefix)(2);
  const auto est = conditional_expectation(
      ctx, [](std::span<const double> z) { return z[0]; }, idx, AdaptedIndex(2), prefix, ExpectationMethod::quadrature());
  EXPECT_NEAR(est.value, oracle, 1e-12);
}

TEST(ConditionalExpectation, SquareGivesMeanSquaredPlusVariance) {
  const auto ctx = fbm_context(0.25, 6);
  const std::vector<double> prefix{0.3, -0.1, 0.7};
  const std::vector<std::size_t> idx{6};
  // Independent oracle: Schur complement formed directly from Sigma.
  const Eigen::MatrixXd& s = ctx.sigma();
  const Eigen::Matrix3d spp = s.topLeftCorner(3, 3);
  const Eigen::Vector3d sfp = s.block(5, 0, 1, 3).transpose();
  const Eigen::Vector3d x(prefix[0], prefix[1], prefix[2]);
  const Eigen::Vector3d w = spp.ldlt().solve(sfp);
  const double mu = w.dot(x);
  const double var = s(5, 5) - sfp.dot(w);
  const auto est = conditional_expectation(
      ctx, [](std::span<const double> z) { return z[0] * z[0]; }, idx, AdaptedIndex(3), prefix,
      ExpectationMethod::quadrature());
  EXPECT_NEAR(est.value, mu * mu + var, 1e-10);
}

TEST(ConditionalExpectation, ObservedCoordinatesAreExact) {
  const auto ctx = fbm_context(0.4, 5);
  const std::vector<double> prefix{0.2, 0.9};
  const std::vector<std::size_t> idx{1, 2};
  const auto est = conditional_expectation(
      ctx, [](std::span<const double> z) { return std::exp(z[0]) * z[1]; }, idx, AdaptedIndex(2), prefix,
      ExpectationMethod::quadrature());
  EXPECT_NEAR(est.value, std::exp(0.2) * 0.9, 1e-14);
}

TEST(ConditionalExpectation, TowerProperty) {
  const auto ctx = fbm_context(0.25, 6);
  const std::vector<std::size_t> idx{4, 6};
  const SmoothMap g = [](std::span<const double> z) { return std::sin(z[0]) + z[0] * z[1] * z[1]; };
  const std::vector<double> prefix1{0.4};
  const double direct =
      conditional_expectation(ctx, g, idx, AdaptedIndex(1), prefix1, ExpectationMethod::quadrature(24)).value;
  // Integrate E[g | X_1, X_2] over the conditional law of X_2 given X_1.
  const auto law = conditional_law(ctx, AdaptedIndex(1));
  const double m2 = law.mean(prefix1)(0);
  const double sd2 = std::sqrt(law.covariance(0, 0));
  const auto& rule = gauss_hermite(24);
  double tower = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const std::vector<double> prefix2{0.4, m2 + sd2 * rule.nodes[k]};
    tower += rule.weights[k] *
             conditional_expectation(ctx, g, idx, AdaptedIndex(2), prefix2, ExpectationMethod::quadrature(24)).value;
  }
  EXPECT_NEAR(direct, tower, 1e-10);
}

TEST(ConditionalExpectation, MonteCarloWithinStandardError) {
  const auto ctx = fbm_context(0.25, 6);
  const std::vector<double> prefix{0.1};
  const std::vector<std::size_t> idx{3, 6};
  const SmoothMap g = [](std::span<const double> z) { return z[0] * z[1]; };
  const double exact = conditional_expectation(ctx, g, idx, AdaptedIndex(1), prefix, ExpectationMethod::quadrature()).value;
  const auto mc = conditional_expectation(ctx, g, idx, AdaptedIndex(1), prefix, ExpectationMethod::monte_carlo(20000, 4));
  EXPECT_GT(mc.standard_error, 0.0);
  EXPECT_LE(std::abs(mc.value - exact), 4.0 * mc.standard_error);
}

TEST(ConditionalExpectation, QuadratureBeyondFourDimensionsUnsupported) {
  const auto ctx = fbm_context(0.25, 6);
  const std::vector<std::size_t> idx{2, 3, 4, 5, 6};
  const SmoothMap g = [](std::span<const double> z) { return z[0]; };
  EXPECT_THROW(conditional_expectation(ctx, g, idx, AdaptedIndex(1), std::vector<double>{0.0},
                                       ExpectationMethod::quadrature()),
               UnsupportedError);
}

TEST(EnsembleIo, RoundTripIsExact) {
  const auto ctx = fbm_context(0.25, 7);
  const auto e = sample_ensemble(ctx, 300, 21);
  const auto file = std::filesystem::temp_directory_path() / "roughop_test_ensemble.bin";
  write_ensemble(file, e);
  const auto back = read_ensemble(file);
  EXPECT_EQ(back.paths, e.paths);
  EXPECT_EQ(back.seed, 21u);
  EXPECT_EQ(std::filesystem::file_size(file), 40u + 300u * 7u * 8u);
  std::filesystem::remove(file);
  EXPECT_THROW(read_ensemble(file), IoError);
}
