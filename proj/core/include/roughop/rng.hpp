#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace roughop {

/// Reproducible random stream addressed by (seed, stream id).
///
/// The n-th variate drawn from a stream depends only on (seed, stream, n), so
/// work split into per-stream chunks gives the same numbers for any number of
/// worker threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  void fill_normal(std::span<double> out) {
    for (double& x : out) x = normal_(engine_);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

}  // namespace roughop
