#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "roughop/errors.hpp"
#include "roughop/functional.hpp"
#include "roughop/gaussian.hpp"
#include "roughop/malliavin.hpp"
#include "roughop/stats.hpp"

using namespace roughop;

namespace {

ScalarTerm square() {
  return {[](double x) { return x * x; }, [](double x) { return 2.0 * x; }, [](double) { return 2.0; }};
}

}  // namespace

TEST(Functional, QuadraticDerivative) {
  const auto grid = TimeGrid::uniform(4, 1.0);
  const GramContext ctx(CovarianceModel::fractional(HurstParameter(0.25)), grid);
  const auto f = make_functional("quadratic", grid);
  const std::vector<double> path{0.1, 0.2, 0.3, -0.7};
  EXPECT_NEAR(f.evaluate(path), 0.49, 1e-15);
  const auto d = derivative(f, path);
  EXPECT_EQ(d.coeffs(), Eigen::Vector4d(0, 0, 0, -1.4));
}

TEST(Functional, TwoTimeDerivative) {
  const auto grid = TimeGrid::uniform(4, 1.0);
  const auto f = make_functional("two_time", grid);
  const std::vector<double> path{0.1, 0.2, 0.3, -0.7};
  EXPECT_NEAR(f.evaluate(path), std::sin(0.2) + std::cos(-0.7), 1e-15);
  const auto d = derivative(f, path);
  EXPECT_NEAR(d.coeffs()(1), std::cos(0.2), 1e-15);
  EXPECT_NEAR(d.coeffs()(3), -std::sin(-0.7), 1e-15);
  EXPECT_EQ(d.coeffs()(0), 0.0);
}

TEST(Functional, ConstantHasZeroDerivative) {
  const auto f = CylindricalFunctional::general("const", {2}, [](std::span<const double>) { return 3.0; },
                                                [](std::span<const double>, std::span<double> g) { g[0] = 0.0; });
  const std::vector<double> path{1.0, 2.0, 3.0};
  EXPECT_EQ(f.evaluate(path), 3.0);
  EXPECT_EQ(derivative(f, path).coeffs().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Functional, CombineIsLinear) {
  const auto grid = TimeGrid::uniform(4, 1.0);
  const auto f = make_functional("quadratic", grid);
  const auto g = make_functional("two_time", grid);
  const auto h = combine(2.0, f, -3.0, g);
  const std::vector<double> path{0.4, -0.2, 0.9, 1.1};
  EXPECT_NEAR(h.evaluate(path), 2.0 * f.evaluate(path) - 3.0 * g.evaluate(path), 1e-14);
  const auto dh = derivative(h, path);
  const auto expected = 2.0 * derivative(f, path) - 3.0 * derivative(g, path);
  EXPECT_LE((dh.coeffs() - expected.coeffs()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Functional, LiftToComponentsUsesChainRule) {
  const auto grid = TimeGrid::uniform(2, 1.0);
  const auto f = make_functional("quadratic", grid);
  const auto lifted = lift_to_components(f, 2.0, 3.0);
  // Component path (B_1, BH_1, B_2, BH_2); X_2 = 2 B_2 + 3 BH_2.
  const std::vector<double> path{0.0, 0.0, 0.5, -0.1};
  const double x = 2.0 * 0.5 + 3.0 * -0.1;
  EXPECT_NEAR(lifted.evaluate(path), x * x, 1e-15);
  const auto d = derivative(lifted, path);
  EXPECT_NEAR(d.coeffs()(2), 2.0 * x * 2.0, 1e-14);
  EXPECT_NEAR(d.coeffs()(3), 2.0 * x * 3.0, 1e-14);
  EXPECT_EQ(d.coeffs()(0), 0.0);
}

TEST(Functional, ValidatesConstruction) {
  EXPECT_THROW(CylindricalFunctional::additive("bad", {0}, {square()}), DomainError);
  EXPECT_THROW(CylindricalFunctional::additive("bad", {1, 1}, {square(), square()}), DomainError);
  EXPECT_THROW(CylindricalFunctional::additive("bad", {1, 2}, {square()}), DimensionError);
  EXPECT_THROW(make_functional("nope", TimeGrid::uniform(4, 1.0)), ConfigError);
}

TEST(Functional, CatalogSnapsWithWarning) {
  std::vector<std::string> warnings;
  const auto grid = TimeGrid::from_times({0.3, 0.45, 1.0}, 1.0);
  const auto f = make_functional("linear", grid, &warnings);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_EQ(f.indices(), (std::vector<std::size_t>{2, 3}));
  std::vector<std::string> none;
  make_functional("linear", TimeGrid::uniform(8, 1.0), &none);
  EXPECT_TRUE(none.empty());
  for (const auto& name : catalog_names()) {
    EXPECT_NO_THROW(make_functional(name, TimeGrid::uniform(8, 1.0)));
    EXPECT_FALSE(catalog_description(name).empty());
  }
}

TEST(GradientCheck, QuadraticIsTight) {
  const auto f = CylindricalFunctional::additive("sq", {1}, {square()});
  const auto r = gradient_check(f, 1);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.points, 100u);
  EXPECT_LE(r.max_relative_deviation, 1e-8);
}

TEST(GradientCheck, SineWithinTolerance) {
  const auto f = CylindricalFunctional::general(
      "sin", {1, 2}, [](std::span<const double> z) { return std::sin(z[0]) * z[1]; },
      [](std::span<const double> z, std::span<double> g) {
        g[0] = std::cos(z[0]) * z[1];
        g[1] = std::sin(z[0]);
      });
  const auto r = gradient_check(f, 2);
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.max_relative_deviation, 1e-4);
}

TEST(GradientCheck, WrongGradientIsFlagged) {
  const auto f = CylindricalFunctional::general(
      "wrong", {1}, [](std::span<const double> z) { return std::sin(z[0]); },
      [](std::span<const double> z, std::span<double> g) { g[0] = 1.1 * std::cos(z[0]); });
  const auto r = gradient_check(f, 3);
  EXPECT_FALSE(r.passed);
  EXPECT_NEAR(r.max_relative_deviation, 0.1 / 1.1, 0.02);
}

TEST(GradientCheck, FiniteDifferenceFallbackFlagged) {
  const auto f = CylindricalFunctional::general("fd", {1}, [](std::span<const double> z) { return z[0] * z[0]; });
  EXPECT_TRUE(f.finite_difference_gradient());
  std::vector<double> g(1);
  f.gradient(std::vector<double>{1.5}, g);
  EXPECT_NEAR(g[0], 3.0, 1e-8);
}

TEST(IntegralFunctional, TrapezoidWeights) {
  const auto w = trapezoid_weights(TimeGrid::uniform(4, 1.0));
  EXPECT_EQ(w, (std::vector<double>{0.25, 0.25, 0.25, 0.125}));
  EXPECT_THROW(discretize_integral_functional({"x", [](double, double x) { return x; },
                                               [](double, double) { return 1.0; }, [](double, double) { return 0.0; }},
                                              TimeGrid::from_times({0.5}, 1.0)),
               DomainError);
}

TEST(IntegralFunctional, TimeOnlyIntegrandHasZeroDerivative) {
  const auto grid = TimeGrid::uniform(8, 1.0);
  const auto f = discretize_integral_functional(
      {"t", [](double t, double) { return t; }, [](double, double) { return 0.0; }, [](double, double) { return 0.0; }},
      grid);
  const std::vector<double> path(8, 0.7);
  EXPECT_NEAR(f.evaluate(path), 0.5, 1e-14);
  EXPECT_EQ(derivative(f, path).coeffs().cwiseAbs().maxCoeff(), 0.0);
}

TEST(IntegralFunctional, BrownianTimeIntegralVariance) {
  const auto grid = TimeGrid::uniform(64, 1.0);
  const GramContext ctx(CovarianceModel::brownian(), grid);
  const auto f = discretize_integral_functional(
      {"x", [](double, double x) { return x; }, [](double, double) { return 1.0; }, [](double, double) { return 0.0; }},
      grid);
  // Exact variance of the discrete sum is w^T Sigma w; the continuum value is T^3/3.
  const auto w = trapezoid_weights(grid);
  const Eigen::Map<const Eigen::VectorXd> wv(w.data(), 64);
  EXPECT_NEAR(wv.dot(ctx.sigma() * wv), 1.0 / 3.0, 1e-3);
  const auto e = sample_ensemble(ctx, 100000, 17);
  std::vector<double> values(e.size());
  for (std::size_t r = 0; r < e.size(); ++r) values[r] = f.evaluate(e.path(r));
  const auto s = summarize(values);
  EXPECT_LE(std::abs(s.mean), 5.0 * s.standard_error);
  const double se_var = s.variance * std::sqrt(2.0 / static_cast<double>(values.size()));
  EXPECT_LE(std::abs(s.variance - 1.0 / 3.0), 5.0 * se_var + 1e-3);
}

TEST(IntegralFunctional, SquareMeanAtRoughHurst) {
  const auto grid = TimeGrid::uniform(256, 1.0);
  const GramContext ctx(CovarianceModel::fractional(HurstParameter(0.25)), grid);
  const auto f = make_functional("integral_square", grid);
  // E[F] = sum_k w_k t_k^{1/2} exactly; the continuum value is 2/3.
  const auto w = trapezoid_weights(grid);
  double mean = 0.0;
  for (std::size_t k = 0; k < 256; ++k) mean += w[k] * std::sqrt(grid.time(k + 1));
  EXPECT_NEAR(mean, 2.0 / 3.0, 1e-3);
  const double exact = conditional_functional_mean(ctx, f, AdaptedIndex(0), std::span<const double>{});
  EXPECT_NEAR(exact, mean, 1e-12);
}
