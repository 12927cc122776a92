#include "roughop/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Dense>

#include "roughop/errors.hpp"

namespace roughop {

namespace {

GaussHermiteRule build_rule(std::size_t n) {
  // Jacobi matrix of the monic He_n recurrence: He_{k+1} = x He_k - k He_{k-1}.
  const auto size = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(size, size);
  for (Eigen::Index k = 1; k < size; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  double total = 0.0;
  for (Eigen::Index k = 0; k < size; ++k) {
    rule.nodes[k] = eig.eigenvalues()[k];
    rule.weights[k] = eig.eigenvectors()(0, k) * eig.eigenvectors()(0, k);
    total += rule.weights[k];
  }
  for (double& w : rule.weights) w /= total;
  // Symmetrize: the exact rule is symmetric about zero.
  for (std::size_t k = 0; k < n / 2; ++k) {
    const std::size_t m = n - 1 - k;
    const double x = 0.5 * (rule.nodes[m] - rule.nodes[k]);
    const double w = 0.5 * (rule.weights[m] + rule.weights[k]);
    rule.nodes[k] = -x;
    rule.nodes[m] = x;
    rule.weights[k] = w;
    rule.weights[m] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite(std::size_t n) {
  if (n == 0 || n > 256) throw DomainError("Gauss-Hermite node count must be in 1..256");
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build_rule(n));
  return *slot;
}

}  // namespace roughop
