#pragma once

// Sampling on the grid, exact Gaussian conditioning on a path prefix, the
// isonormal map, and conditional expectations of smooth maps.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "roughop/energy_space.hpp"
#include "roughop/model.hpp"

namespace roughop {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Paths per RNG stream. Stream ids are stream_base + chunk index, so an
/// ensemble is a pure function of (seed, stream_base, m, grid).
inline constexpr std::size_t kPathsPerStream = 256;

struct SamplingOptions {
  std::size_t workers = 0;  // 0: default_workers()
  std::uint64_t stream_base = 0;
};

/// M sampled paths (rows) on an N-point grid.
struct PathEnsemble {
  RowMatrix paths;
  std::uint64_t seed = 0;
  std::string model;
  bool circulant = false;
  /// Set when the circulant sampler had to fall back to Cholesky.
  bool circulant_fallback = false;

  std::size_t size() const noexcept { return static_cast<std::size_t>(paths.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(paths.cols()); }
  std::span<const double> path(std::size_t r) const {
    return {paths.data() + r * static_cast<std::size_t>(paths.cols()), static_cast<std::size_t>(paths.cols())};
  }
};

/// Rows are i.i.d. N(0, Sigma), computed as chol * z.
PathEnsemble sample_ensemble(const GramContext& ctx, std::size_t m, std::uint64_t seed,
                             const SamplingOptions& options = {});

/// Circulant-embedding sampler for fBM (or BM) on a uniform grid: fractional
/// Gaussian noise by FFT, then cumulative sums. Falls back to the Cholesky
/// sampler (flagged) if embedding eigenvalues are negative beyond 1e-9 * max.
PathEnsemble sample_ensemble_circulant(const CovarianceModel& model, const TimeGrid& grid, std::size_t m,
                                       std::uint64_t seed, const SamplingOptions& options = {});

/// Stream offset of the fractional component in sample_component_ensemble.
inline constexpr std::uint64_t kFractionalStreamBase = std::uint64_t{1} << 32;

/// Paths of the component system (B_{t_1}, B^H_{t_1}, B_{t_2}, ...). B uses the
/// streams of a plain Brownian ensemble with the same seed and B^H the streams
/// from kFractionalStreamBase on, so either component alone reproduces the
/// corresponding single-process sampler.
PathEnsemble sample_component_ensemble(const CovarianceModel& mixed, const TimeGrid& grid, std::size_t m,
                                       std::uint64_t seed, const SamplingOptions& options = {});

/// Eigenvalues of the circulant embedding of the fGn autocovariance (length 2n).
Eigen::VectorXd circulant_eigenvalues(double hurst, double step, std::size_t n);

/// I(h) = sum_i c_i X_{t_i} on one path.
double isonormal(const CMElement& h, std::span<const double> path);

/// Law of coordinates j+1..N given X_1..X_j.
struct ConditionalLaw {
  std::size_t observed = 0;
  Eigen::MatrixXd mean_map;    // (N-j) x j regression coefficients
  Eigen::MatrixXd covariance;  // (N-j) x (N-j) Schur complement

  Eigen::VectorXd mean(std::span<const double> prefix) const;
};

ConditionalLaw conditional_law(const GramContext& ctx, AdaptedIndex j);

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

struct ExpectationMethod {
  enum class Kind { quadrature, monte_carlo };
  Kind kind = Kind::quadrature;
  std::size_t nodes = 32;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  static ExpectationMethod quadrature(std::size_t nodes = 32) { return {Kind::quadrature, nodes, 0, 0, 0}; }
  static ExpectationMethod monte_carlo(std::size_t samples, std::uint64_t seed, std::uint64_t stream = 0) {
    return {Kind::monte_carlo, 0, samples, seed, stream};
  }
};

inline constexpr std::size_t kMaxQuadratureDims = 4;

using SmoothMap = std::function<double(std::span<const double>)>;

/// E[g(X_{i_1}, ..., X_{i_k}) | X_1..X_j = prefix].
///
/// `indices` are the 1-based grid indices g reads. Observed ones are taken
/// from `prefix`; the rest are integrated against their conditional law,
/// by tensor Gauss-Hermite in whitened coordinates (at most 4 future
/// dimensions) or by Monte Carlo, which also reports a standard error.
Estimate conditional_expectation(const GramContext& ctx, const SmoothMap& g, std::span<const std::size_t> indices,
                                 AdaptedIndex j, std::span<const double> prefix, const ExpectationMethod& method);

/// Tensor-product Gauss-Hermite expectation E[g(mean + factor * Z)], Z ~ N(0, I_d).
double gaussian_expectation(const Eigen::VectorXd& mean, const Eigen::MatrixXd& factor, const SmoothMap& g,
                            std::size_t nodes);

/// Symmetric square root factor of a PSD matrix, keeping only columns with
/// eigenvalue above 1e-14 * trace.
Eigen::MatrixXd whitening_factor(const Eigen::MatrixXd& covariance);

}  // namespace roughop
