#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "roughop/errors.hpp"
#include "roughop/gaussian.hpp"
#include "roughop/parallel.hpp"
#include "roughop/rng.hpp"

namespace roughop {

namespace {

// Autocovariance of fractional Gaussian noise with unit step.
double fgn_autocovariance(double hurst, std::size_t lag) {
  const double k = static_cast<double>(lag);
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(k + 1.0, two_h) - 2.0 * std::pow(k, two_h) + std::pow(std::abs(k - 1.0), two_h));
}

}  // namespace

Eigen::VectorXd circulant_eigenvalues(double hurst, double step, std::size_t n) {
  const std::size_t size = 2 * n;
  const double scale = std::pow(step, 2.0 * hurst);
  std::vector<std::complex<double>> row(size);
  for (std::size_t k = 0; k <= n; ++k) row[k] = scale * fgn_autocovariance(hurst, k);
  for (std::size_t k = n + 1; k < size; ++k) row[k] = row[size - k];
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, row);
  Eigen::VectorXd out(static_cast<Eigen::Index>(size));
  for (std::size_t k = 0; k < size; ++k) out[static_cast<Eigen::Index>(k)] = spectrum[k].real();
  return out;
}

PathEnsemble sample_ensemble_circulant(const CovarianceModel& model, const TimeGrid& grid, std::size_t m,
                                       std::uint64_t seed, const SamplingOptions& options) {
  if (model.kind() == ModelKind::mixed) throw UnsupportedError("circulant sampler supports BM and fBM only");
  if (!grid.is_uniform()) throw UnsupportedError("circulant sampler needs a uniform grid");
  if (m == 0) throw DomainError("ensemble needs at least one path");
  const std::size_t n = grid.size();
  const std::size_t size = 2 * n;
  const double hurst = model.hurst();
  const Eigen::VectorXd lambda = circulant_eigenvalues(hurst, grid.step(), n);
  const double max_lambda = lambda.maxCoeff();
  if (lambda.minCoeff() < -1e-9 * max_lambda) {
    PathEnsemble fallback = sample_ensemble(GramContext(model, grid), m, seed, options);
    fallback.circulant_fallback = true;
    return fallback;
  }
  std::vector<double> amplitude(size);
  for (std::size_t k = 0; k < size; ++k) {
    amplitude[k] = std::sqrt(std::max(lambda[static_cast<Eigen::Index>(k)], 0.0) / static_cast<double>(size));
  }

  PathEnsemble out;
  out.seed = seed;
  out.model = describe(model);
  out.circulant = true;
  out.paths.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  const std::size_t chunks = (m + kPathsPerStream - 1) / kPathsPerStream;
  parallel_for(chunks, options.workers, [&](std::size_t chunk) {
    const std::size_t r0 = chunk * kPathsPerStream;
    const std::size_t rows = std::min(kPathsPerStream, m - r0);
    RngStream rng(seed, options.stream_base + chunk);
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> w(size);
    std::vector<std::complex<double>> y;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t k = 0; k < size; ++k) {
        const double re = rng.normal();
        const double im = rng.normal();
        w[k] = amplitude[k] * std::complex<double>(re, im);
      }
      fft.fwd(y, w);
      double level = 0.0;
      auto row = out.paths.row(static_cast<Eigen::Index>(r0 + r));
      for (std::size_t k = 0; k < n; ++k) {
        level += y[k].real();
        row[static_cast<Eigen::Index>(k)] = level;
      }
    }
  });
  return out;
}

}  // namespace roughop
