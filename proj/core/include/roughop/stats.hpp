#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roughop {

/// Sample mean, unbiased variance and standard error of the mean.
struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  double standard_error = 0.0;
};

Summary summarize(std::span<const double> values);
/// Summary of the paired differences a_i - b_i.
Summary summarize_difference(std::span<const double> a, std::span<const double> b);
double sample_covariance(std::span<const double> a, std::span<const double> b);
/// Pearson correlation; NaN when either sample is constant.
double correlation(std::span<const double> a, std::span<const double> b);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Kolmogorov-Smirnov distance between the sample and N(0, variance).
double ks_statistic_normal(std::vector<double> sample, double variance);

}  // namespace roughop
