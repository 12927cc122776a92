#pragma once

#include <cstddef>
#include <vector>

namespace roughop {

/// Gauss-Hermite rule for E[g(Z)], Z ~ N(0, 1): sum_k weights[k] * g(nodes[k]).
/// Weights sum to one; the rule is exact for polynomials of degree < 2n.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Golub-Welsch construction for the probabilists' Hermite weight. Rules are
/// computed once per node count and cached (thread-safe).
const GaussHermiteRule& gauss_hermite(std::size_t n);

inline constexpr std::size_t kDefaultHermiteNodes = 32;

}  // namespace roughop
