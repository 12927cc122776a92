#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "roughop/experiments.hpp"
#include "roughop/parallel.hpp"
#include "roughop/stats.hpp"

namespace roughop::detail {

/// fn(r) for every path index r, in chunks of kPathsPerStream. Each call must
/// only write slot r of its outputs so the result is independent of workers.
template <class Fn>
void map_paths(std::size_t m, std::size_t workers, Fn&& fn) {
  const std::size_t chunks = (m + kPathsPerStream - 1) / kPathsPerStream;
  parallel_for(chunks, workers, [&](std::size_t chunk) {
    const std::size_t end = std::min(m, (chunk + 1) * kPathsPerStream);
    for (std::size_t r = chunk * kPathsPerStream; r < end; ++r) fn(r);
  });
}

Report make_report(const ExperimentConfig& cfg, const std::string& experiment, const std::string& model,
                   double hurst, std::size_t grid_n);

Json summary_json(const Summary& s);

/// |a - b| <= k * sqrt(se_a^2 + se_b^2).
bool within_se(double a, double se_a, double b, double se_b, double k);

std::string fmt(const char* format, double a);
std::string fmt(const char* format, double a, double b);
std::string fmt(const char* format, double a, double b, double c);

/// Grid used for a given size: uniform on [0, horizon].
TimeGrid experiment_grid(const ExperimentConfig& cfg, std::size_t n);

}  // namespace roughop::detail
