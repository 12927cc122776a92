#pragma once

// Covariance models, time grids and Gram matrices. Everything downstream of
// this header only ever sees the Gram matrix; no Volterra kernel is used.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace roughop {

/// Hurst index, validated to lie in the open interval (0, 1).
class HurstParameter {
 public:
  explicit HurstParameter(double value);

  double value() const noexcept { return value_; }
  bool rough() const noexcept { return value_ < 0.5; }

 private:
  double value_;
};

/// Strictly increasing observation times in (0, T].
///
/// Time 0 is never part of a grid: X_0 = 0 almost surely, so its representer
/// vanishes and would make the Gram matrix singular. Grid indices in the rest
/// of the library are 1-based, with index 0 standing for the origin.
class TimeGrid {
 public:
  /// t_i = i * T / n for i = 1..n.
  static TimeGrid uniform(std::size_t n, double horizon);
  /// Arbitrary strictly increasing times; the last one must not exceed `horizon`.
  static TimeGrid from_times(std::vector<double> times, double horizon);

  std::size_t size() const noexcept { return times_.size(); }
  double horizon() const noexcept { return horizon_; }
  bool is_uniform() const noexcept { return uniform_; }
  /// Uniform spacing; only meaningful when is_uniform().
  double step() const noexcept { return horizon_ / static_cast<double>(times_.size()); }

  std::span<const double> times() const noexcept { return times_; }
  /// Time of 1-based grid index i; time(0) == 0.
  double time(std::size_t i) const;

  /// 1-based index whose time is closest to t.
  std::size_t nearest_index(double t) const;
  /// 1-based index of an exact grid time (relative tolerance 1e-12), if any.
  std::optional<std::size_t> find_index(double t) const;

 private:
  TimeGrid(std::vector<double> times, double horizon, bool uniform);

  std::vector<double> times_;
  double horizon_;
  bool uniform_;
};

enum class ModelKind { brownian, fractional, mixed };

/// Closed-form covariance of BM, fBM(H), or the independent mixture alpha*B + beta*B^H.
class CovarianceModel {
 public:
  static CovarianceModel brownian();
  static CovarianceModel fractional(HurstParameter hurst);
  static CovarianceModel mixed(double alpha, double beta, HurstParameter hurst);

  ModelKind kind() const noexcept { return kind_; }
  /// Hurst index of the fractional part; 0.5 for plain Brownian motion.
  double hurst() const noexcept { return hurst_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  /// Short lowercase name used in report file names: "bm", "fbm", "mixed".
  std::string name() const;

  double operator()(double t, double s) const;

 private:
  CovarianceModel(ModelKind kind, double hurst, double alpha, double beta);

  ModelKind kind_;
  double hurst_;
  double alpha_;
  double beta_;
};

/// R_H(t, s) = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double hurst, double t, double s);

/// R(t, s) for the model; throws DomainError for negative times.
double covariance(const CovarianceModel& model, double t, double s);

/// Var(X_t - X_s) = R(t,t) - 2R(t,s) + R(s,s) for 0 <= s <= t.
double increment_variance(const CovarianceModel& model, double s, double t);

/// Gram matrix of a grid plus its (possibly jittered) Cholesky factor.
struct GramMatrix {
  Eigen::MatrixXd sigma;  // un-jittered entries
  Eigen::MatrixXd chol;   // lower triangular, chol * chol^T = sigma + jitter_applied * I
  double jitter_applied = 0.0;
};

/// Cholesky with the fixed jitter ladder: eps * mean(diag) for eps = 1e-12 .. 1e-8.
/// `what` is included in the IllConditionedError message.
GramMatrix factor_gram(Eigen::MatrixXd sigma, const std::string& what);

/// Sigma_ij = R(t_i, t_j) for the model on the grid, factorized.
GramMatrix build_gram(const CovarianceModel& model, const TimeGrid& grid);

std::string describe(const CovarianceModel& model);
std::string describe(const TimeGrid& grid);

}  // namespace roughop
