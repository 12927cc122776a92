#include <random>

#include <gtest/gtest.h>

#include "roughop/energy_space.hpp"
#include "roughop/errors.hpp"

using namespace roughop;

namespace {

GramContext fbm_context(double h, std::size_t n) {
  return GramContext(CovarianceModel::fractional(HurstParameter(h)), TimeGrid::uniform(n, 1.0));
}

CMElement random_element(std::size_t n, std::mt19937_64& gen) {
  std::normal_distribution<double> z;
  Eigen::VectorXd c(static_cast<Eigen::Index>(n));
  for (auto& v : c) v = z(gen);
  return CMElement(c);
}

// Independent oracle: normal equations of the projection, solved by LDLT.
CMElement oracle_projection(const Eigen::MatrixXd& sigma, const CMElement& h, std::size_t j) {
  const Eigen::Index n = sigma.rows(), p = static_cast<Eigen::Index>(j);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  if (p == 0) return CMElement(out);
  const Eigen::VectorXd rhs = (sigma * h.coeffs()).head(p);
  out.head(p) = sigma.topLeftCorner(p, p).ldlt().solve(rhs);
  return CMElement(out);
}

}  // namespace

TEST(EnergySpace, RepresenterReproducesGridValues) {
  const auto ctx = fbm_context(0.25, 8);
  std::mt19937_64 gen(1);
  const auto h = random_element(8, gen);
  for (std::size_t i = 1; i <= 8; ++i) {
    EXPECT_NEAR(inner_product(ctx, h, representer(ctx, i)), evaluate(ctx, h, i), 1e-13);
    EXPECT_NEAR(norm_squared(ctx, representer(ctx, i)), covariance(ctx.model(), ctx.grid().time(i), ctx.grid().time(i)),
                1e-14);
  }
}

TEST(EnergySpace, BrownianIncrementNorm) {
  const GramContext ctx(CovarianceModel::brownian(), TimeGrid::uniform(4, 1.0));
  EXPECT_NEAR(norm_squared(ctx, increment_element(ctx, 1, 3)), 0.5, 1e-15);
  EXPECT_NEAR(norm_squared(ctx, increment_element(ctx, 0, 2)), 0.5, 1e-15);
}

TEST(EnergySpace, BrownianProjectionOfTerminalRepresenter) {
  const GramContext ctx(CovarianceModel::brownian(), TimeGrid::uniform(10, 1.0));
  for (std::size_t j = 1; j < 10; ++j) {
    const auto p = project_adapted(ctx, representer(ctx, 10), AdaptedIndex(j));
    EXPECT_LE(energy_norm(ctx, p - representer(ctx, j)), 1e-12) << j;
  }
}

TEST(EnergySpace, ProjectionFixesAdaptedRepresenters) {
  const auto ctx = fbm_context(0.25, 16);
  for (std::size_t j = 1; j <= 16; ++j) {
    for (std::size_t i = 1; i <= j; ++i) {
      const auto k = representer(ctx, i);
      EXPECT_LE(energy_norm(ctx, project_adapted(ctx, k, AdaptedIndex(j)) - k), 1e-12);
    }
  }
}

TEST(EnergySpace, ProjectionProperties) {
  for (double h : {0.1, 0.25, 0.4, 0.5}) {
    const auto ctx = fbm_context(h, 32);
    std::mt19937_64 gen(static_cast<std::uint64_t>(h * 1000));
    for (int rep = 0; rep < 10; ++rep) {
      const auto x = random_element(32, gen);
      for (std::size_t j = 0; j <= 32; j += 4) {
        const AdaptedIndex aj(j);
        const auto p = project_adapted(ctx, x, aj);
        EXPECT_LE(energy_norm(ctx, project_adapted(ctx, p, aj) - p), 1e-10);
        for (std::size_t i = 1; i <= j; ++i) EXPECT_NEAR(inner_product(ctx, x - p, representer(ctx, i)), 0.0, 1e-10);
        EXPECT_LE(norm_squared(ctx, p), norm_squared(ctx, x) * (1.0 + 1e-12) + 1e-14);
        for (std::size_t k = j; k <= 32; k += 8) {
          const auto nested = project_adapted(ctx, project_adapted(ctx, x, AdaptedIndex(k)), aj);
          EXPECT_LE(energy_norm(ctx, nested - p), 1e-10);
        }
        EXPECT_LE(energy_norm(ctx, p - oracle_projection(ctx.sigma(), x, j)), 1e-10);
      }
    }
  }
}

TEST(EnergySpace, InnovationIsOrthogonalToPast) {
  const auto ctx = fbm_context(0.25, 12);
  for (std::size_t j = 1; j <= 12; ++j) {
    const auto e = innovation_element(ctx, j, AdaptedIndex(j - 1));
    for (std::size_t i = 1; i < j; ++i) EXPECT_NEAR(inner_product(ctx, e, representer(ctx, i)), 0.0, 1e-12);
    EXPECT_GT(norm_squared(ctx, e), 0.0);
  }
}

TEST(EnergySpace, LeadingSolveMatchesOracle) {
  const auto ctx = fbm_context(0.4, 20);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z;
  for (std::size_t j : {1u, 5u, 13u, 20u}) {
    const Eigen::Index p = static_cast<Eigen::Index>(j);
    Eigen::VectorXd rhs(p);
    for (auto& v : rhs) v = z(gen);
    const Eigen::VectorXd oracle = ctx.sigma().topLeftCorner(p, p).ldlt().solve(rhs);
    EXPECT_LE((ctx.solve_leading_vector(j, rhs) - oracle).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(EnergySpace, ComponentSystemIsBlockDiagonal) {
  const auto mixed = CovarianceModel::mixed(1.0, 1.0, HurstParameter(0.25));
  const auto ctx = GramContext::components(mixed, TimeGrid::uniform(4, 1.0));
  EXPECT_EQ(ctx.dim(), 8u);
  EXPECT_EQ(ctx.block_size(), 2u);
  EXPECT_NEAR(ctx.sigma()(0, 2), 0.25, 1e-15);                  // B_{1/4}, B_{1/2}
  EXPECT_NEAR(ctx.sigma()(1, 3), fbm_covariance(0.25, 0.25, 0.5), 1e-15);
  EXPECT_EQ(ctx.sigma()(0, 1), 0.0);
  EXPECT_EQ(ctx.sigma()(0, 3), 0.0);
}

TEST(EnergySpace, DimensionMismatchRaises) {
  const auto ctx = fbm_context(0.25, 4);
  EXPECT_THROW(inner_product(ctx, CMElement::zero(3), CMElement::zero(4)), DimensionError);
  EXPECT_THROW(representer(ctx, 5), DomainError);
}
