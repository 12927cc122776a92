#pragma once

// The discrete Cameron-Martin (energy) space of a grid. An element
// h = sum_i c_i k_{t_i} is stored as its coefficient vector c; every inner
// product goes through the Gram matrix.

#include <cstddef>
#include <memory>

#include <Eigen/Dense>

#include "roughop/model.hpp"

namespace roughop {

/// Information up to the j-th coordinate (j = 0 is the trivial sigma-algebra).
struct AdaptedIndex {
  explicit constexpr AdaptedIndex(std::size_t observed) noexcept : j(observed) {}
  std::size_t j;
};

/// Immutable Gram matrix with cached factorization, shareable across threads.
///
/// The Cholesky factor of a leading principal block of Sigma is the leading
/// block of the full factor, so one O(N^3) factorization serves every
/// prefix solve at O(j^2).
class GramContext {
 public:
  GramContext(const CovarianceModel& model, const TimeGrid& grid);

  /// Direct-sum system of a mixed model: coordinates (B_{t_1}, B^H_{t_1}, B_{t_2}, ...)
  /// with block-diagonal covariance. block_size() == 2.
  static GramContext components(const CovarianceModel& mixed, const TimeGrid& grid);

  std::size_t dim() const noexcept;
  /// Coordinates per time step (1, or 2 for the component system).
  std::size_t block_size() const noexcept;
  const CovarianceModel& model() const noexcept;
  const TimeGrid& grid() const noexcept;
  const Eigen::MatrixXd& sigma() const noexcept;
  const Eigen::MatrixXd& chol() const noexcept;
  double jitter() const noexcept;

  /// Solves Sigma[0:j, 0:j] y = rhs with the cached factor.
  Eigen::VectorXd solve_leading_vector(std::size_t j, const Eigen::Ref<const Eigen::VectorXd>& rhs) const;
  Eigen::MatrixXd solve_leading(std::size_t j, const Eigen::Ref<const Eigen::MatrixXd>& rhs) const;

 private:
  struct State;
  explicit GramContext(std::shared_ptr<const State> state);
  std::shared_ptr<const State> state_;
};

/// Coefficient representation of h = sum_i coeffs[i-1] k_{t_i}.
class CMElement {
 public:
  CMElement() = default;
  explicit CMElement(Eigen::VectorXd coeffs) : coeffs_(std::move(coeffs)) {}
  static CMElement zero(std::size_t n) { return CMElement(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))); }

  std::size_t size() const noexcept { return static_cast<std::size_t>(coeffs_.size()); }
  const Eigen::VectorXd& coeffs() const noexcept { return coeffs_; }
  Eigen::VectorXd& coeffs() noexcept { return coeffs_; }

  CMElement& operator+=(const CMElement& other);
  CMElement& operator-=(const CMElement& other);
  CMElement& operator*=(double scale);

  friend CMElement operator+(CMElement a, const CMElement& b) { return a += b; }
  friend CMElement operator-(CMElement a, const CMElement& b) { return a -= b; }
  friend CMElement operator*(double s, CMElement a) { return a *= s; }

 private:
  Eigen::VectorXd coeffs_;
};

double inner_product(const GramContext& ctx, const CMElement& a, const CMElement& b);
double norm_squared(const GramContext& ctx, const CMElement& h);
double energy_norm(const GramContext& ctx, const CMElement& h);

/// k_{t_i} for a 1-based grid index i.
CMElement representer(const GramContext& ctx, std::size_t i);

/// h(t_i) = <h, k_{t_i}> = (Sigma c)_i.
double evaluate(const GramContext& ctx, const CMElement& h, std::size_t i);
/// All grid values (Sigma c) at once.
Eigen::VectorXd evaluate_all(const GramContext& ctx, const CMElement& h);

/// Orthogonal projection onto span{k_{t_1}, ..., k_{t_j}}.
CMElement project_adapted(const GramContext& ctx, const CMElement& h, AdaptedIndex j);

/// k_{t_j} - k_{t_i}; i = 0 denotes the origin (k_0 = 0).
CMElement increment_element(const GramContext& ctx, std::size_t i, std::size_t j);

/// k_{t_i} - P_p k_{t_i}: the part of coordinate i not predictable from the first p coordinates.
/// Its isonormal image is the Gaussian innovation X_{t_i} - E[X_{t_i} | X_1..X_p].
CMElement innovation_element(const GramContext& ctx, std::size_t i, AdaptedIndex p);

}  // namespace roughop
