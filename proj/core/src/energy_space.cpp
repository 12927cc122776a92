#include "roughop/energy_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roughop/errors.hpp"

namespace roughop {

struct GramContext::State {
  CovarianceModel model;
  TimeGrid grid;
  GramMatrix gram;
  std::size_t block;
};

GramContext::GramContext(std::shared_ptr<const State> state) : state_(std::move(state)) {}

GramContext::GramContext(const CovarianceModel& model, const TimeGrid& grid)
    : state_(std::make_shared<const State>(State{model, grid, build_gram(model, grid), 1})) {}

GramContext GramContext::components(const CovarianceModel& mixed, const TimeGrid& grid) {
  if (mixed.kind() != ModelKind::mixed) throw DomainError("component system requires a mixed model");
  const auto n = static_cast<Eigen::Index>(grid.size());
  const auto t = grid.times();
  // Coordinates are the unscaled B and B^H; alpha and beta enter through the
  // functional, not through the Gram matrix.
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      sigma(2 * i, 2 * j) = std::min(t[i], t[j]);
      sigma(2 * i + 1, 2 * j + 1) = fbm_covariance(mixed.hurst(), t[i], t[j]);
    }
  }
  GramMatrix gram = factor_gram(std::move(sigma), "component system of " + describe(mixed) + " on " + describe(grid));
  return GramContext(std::make_shared<const State>(State{mixed, grid, std::move(gram), 2}));
}

std::size_t GramContext::dim() const noexcept { return static_cast<std::size_t>(state_->gram.sigma.rows()); }
std::size_t GramContext::block_size() const noexcept { return state_->block; }
const CovarianceModel& GramContext::model() const noexcept { return state_->model; }
const TimeGrid& GramContext::grid() const noexcept { return state_->grid; }
const Eigen::MatrixXd& GramContext::sigma() const noexcept { return state_->gram.sigma; }
const Eigen::MatrixXd& GramContext::chol() const noexcept { return state_->gram.chol; }
double GramContext::jitter() const noexcept { return state_->gram.jitter_applied; }

Eigen::VectorXd GramContext::solve_leading_vector(std::size_t j, const Eigen::Ref<const Eigen::VectorXd>& rhs) const {
  if (j > dim()) throw DimensionError("leading solve beyond grid size");
  if (static_cast<std::size_t>(rhs.size()) != j) throw DimensionError("leading solve right-hand side has wrong length");
  if (j == 0) return Eigen::VectorXd();
  const auto n = static_cast<Eigen::Index>(j);
  const auto lower = chol().topLeftCorner(n, n).triangularView<Eigen::Lower>();
  Eigen::VectorXd y = lower.solve(rhs);
  lower.transpose().solveInPlace(y);
  return y;
}

Eigen::MatrixXd GramContext::solve_leading(std::size_t j, const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
  if (j > dim()) throw DimensionError("leading solve beyond grid size");
  if (static_cast<std::size_t>(rhs.rows()) != j) throw DimensionError("leading solve right-hand side has wrong row count");
  if (j == 0) return Eigen::MatrixXd(0, rhs.cols());
  const auto n = static_cast<Eigen::Index>(j);
  const auto lower = chol().topLeftCorner(n, n).triangularView<Eigen::Lower>();
  Eigen::MatrixXd y = lower.solve(rhs);
  lower.transpose().solveInPlace(y);
  return y;
}

CMElement& CMElement::operator+=(const CMElement& other) {
  if (other.size() != size()) throw DimensionError("CMElement size mismatch");
  coeffs_ += other.coeffs_;
  return *this;
}

CMElement& CMElement::operator-=(const CMElement& other) {
  if (other.size() != size()) throw DimensionError("CMElement size mismatch");
  coeffs_ -= other.coeffs_;
  return *this;
}

CMElement& CMElement::operator*=(double scale) {
  coeffs_ *= scale;
  return *this;
}

namespace {

void check_element(const GramContext& ctx, const CMElement& h) {
  if (h.size() != ctx.dim()) {
    throw DimensionError("element has " + std::to_string(h.size()) + " coefficients, grid has " +
                         std::to_string(ctx.dim()));
  }
}

void check_index(const GramContext& ctx, std::size_t i) {
  if (i < 1 || i > ctx.dim()) throw DomainError("grid index " + std::to_string(i) + " out of range");
}

}  // namespace

double inner_product(const GramContext& ctx, const CMElement& a, const CMElement& b) {
  check_element(ctx, a);
  check_element(ctx, b);
  return a.coeffs().dot(ctx.sigma() * b.coeffs());
}

double norm_squared(const GramContext& ctx, const CMElement& h) { return inner_product(ctx, h, h); }

double energy_norm(const GramContext& ctx, const CMElement& h) { return std::sqrt(std::max(0.0, norm_squared(ctx, h))); }

CMElement representer(const GramContext& ctx, std::size_t i) {
  check_index(ctx, i);
  CMElement k = CMElement::zero(ctx.dim());
  k.coeffs()[static_cast<Eigen::Index>(i - 1)] = 1.0;
  return k;
}

double evaluate(const GramContext& ctx, const CMElement& h, std::size_t i) {
  check_element(ctx, h);
  check_index(ctx, i);
  return ctx.sigma().row(static_cast<Eigen::Index>(i - 1)).dot(h.coeffs());
}

Eigen::VectorXd evaluate_all(const GramContext& ctx, const CMElement& h) {
  check_element(ctx, h);
  return ctx.sigma() * h.coeffs();
}

CMElement project_adapted(const GramContext& ctx, const CMElement& h, AdaptedIndex j) {
  check_element(ctx, h);
  if (j.j > ctx.dim()) throw DomainError("adapted index beyond grid size");
  CMElement out = CMElement::zero(ctx.dim());
  if (j.j == 0) return out;
  const auto n = static_cast<Eigen::Index>(j.j);
  const Eigen::VectorXd values = ctx.sigma().topRows(n) * h.coeffs();
  out.coeffs().head(n) = ctx.solve_leading_vector(j.j, values);
  return out;
}

CMElement increment_element(const GramContext& ctx, std::size_t i, std::size_t j) {
  if (i >= j) throw DomainError("increment_element needs i < j");
  CMElement out = representer(ctx, j);
  if (i > 0) out.coeffs()[static_cast<Eigen::Index>(i - 1)] = -1.0;
  return out;
}

CMElement innovation_element(const GramContext& ctx, std::size_t i, AdaptedIndex p) {
  check_index(ctx, i);
  if (p.j >= i) throw DomainError("innovation_element needs a prefix strictly before the coordinate");
  CMElement out = representer(ctx, i);
  if (p.j == 0) return out;
  const auto n = static_cast<Eigen::Index>(p.j);
  const Eigen::VectorXd cross = ctx.sigma().col(static_cast<Eigen::Index>(i - 1)).head(n);
  out.coeffs().head(n) = -ctx.solve_leading_vector(p.j, cross);
  return out;
}

}  // namespace roughop
