#include "test_fields.hpp"

#include <cmath>

#include "roughop/errors.hpp"
#include "roughop/rng.hpp"

namespace roughop::detail {

VectorField make_test_field(const GramContext& ctx, const std::string& kind, std::uint64_t seed, std::uint64_t salt) {
  const std::size_t n = ctx.dim();
  const std::size_t bs = ctx.block_size();
  const auto nn = static_cast<Eigen::Index>(n);
  if (kind == "deterministic") {
    // k_T of every component.
    CMElement h = CMElement::zero(n);
    for (std::size_t k = 0; k < bs; ++k) h.coeffs()[nn - 1 - static_cast<Eigen::Index>(k)] = 1.0;
    return VectorField::deterministic(ctx, h);
  }
  const bool adapted = kind == "adapted_affine";
  if (!adapted && kind != "nonadapted_affine") throw ConfigError("unknown test field '" + kind + "'");
  RngStream rng(seed, 0x6669656c64000000ULL + 16 * salt + (adapted ? 1 : 2));
  // Increments within each component: coordinate c steps back to c - block.
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nn, nn);
  const auto b = static_cast<Eigen::Index>(bs);
  for (Eigen::Index j = 0; j < nn; ++j) {
    d(j, j) = 1.0;
    if (j >= b) d(j - b, j) = -1.0;
  }
  Eigen::VectorXd p(nn);
  for (Eigen::Index j = 0; j < nn; ++j) p[j] = 2.0 * rng.uniform() - 1.0;
  const double scale = 0.5 / std::sqrt(static_cast<double>(n));
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(nn, nn);
  std::vector<std::size_t> prefix;
  for (Eigen::Index j = 0; j < nn; ++j) {
    const Eigen::Index limit = adapted ? (j / b) * b : nn;
    for (Eigen::Index i = 0; i < limit; ++i) q(j, i) = scale * rng.normal();
    if (adapted) prefix.push_back(static_cast<std::size_t>(limit));
  }
  return VectorField::affine(ctx, std::move(d), std::move(p), std::move(q), std::move(prefix));
}

double affine_defect(const Eigen::MatrixXd& slope, const Eigen::MatrixXd& gram_directions) {
  const Eigen::MatrixXd m = slope * gram_directions;
  return (m * m).trace();
}

}  // namespace roughop::detail
