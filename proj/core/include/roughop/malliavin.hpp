#pragma once

// Derivative, divergence and predictable projection on a grid.
//
// A vector field is u = sum_j a_j d_j with fixed direction elements d_j
// (columns of a coefficient matrix) and random scalar coefficients a_j(path).
// Its divergence is the finite-dimensional Gaussian one,
//   delta(u) = sum_j a_j I(d_j) - sum_j <D a_j, d_j>,
// which satisfies E[F delta(u)] = E[<DF, u>] exactly for smooth F.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "roughop/energy_space.hpp"
#include "roughop/functional.hpp"
#include "roughop/gaussian.hpp"

namespace roughop {

/// D F = sum_k (W^T grad f)_k k_{t_{c_k}} on one full grid path.
CMElement derivative(const CylindricalFunctional& f, std::span<const double> path);

class VectorField {
 public:
  /// Writes a(path) into `coeffs`; when `jacobian` is non-null also writes
  /// d a_j / d x_k (slots x dim). Returns false if it cannot supply the Jacobian.
  using Rule = std::function<bool(std::span<const double> path, Eigen::Ref<Eigen::VectorXd> coeffs,
                                  Eigen::MatrixXd* jacobian)>;

  /// `directions` is dim x slots. `slot_prefix[j]`, when given, is the number
  /// of leading coordinates slot j may depend on (the field is then adapted).
  VectorField(const GramContext& ctx, Eigen::MatrixXd directions, Rule rule, bool random,
              std::vector<std::size_t> slot_prefix = {});

  /// The single deterministic slot u = h.
  static VectorField deterministic(const GramContext& ctx, const CMElement& h);
  /// a = offset + slope * x along `directions`.
  static VectorField affine(const GramContext& ctx, Eigen::MatrixXd directions, Eigen::VectorXd offset,
                            Eigen::MatrixXd slope, std::vector<std::size_t> slot_prefix = {});

  /// Same coefficients with a central-difference Jacobian (step 1e-5); flagged.
  VectorField with_finite_difference_jacobian() const;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(directions_.rows()); }
  std::size_t slots() const noexcept { return static_cast<std::size_t>(directions_.cols()); }
  const GramContext& context() const noexcept { return ctx_; }
  const Eigen::MatrixXd& directions() const noexcept { return directions_; }
  /// Sigma * directions: column j holds <k_{t_i}, d_j> in row i.
  const Eigen::MatrixXd& gram_directions() const noexcept { return gram_directions_; }
  bool random() const noexcept { return random_; }
  bool adapted() const noexcept { return !slot_prefix_.empty(); }
  const std::vector<std::size_t>& slot_prefix() const noexcept { return slot_prefix_; }
  bool finite_difference() const noexcept { return finite_difference_; }

  Eigen::VectorXd coefficients(std::span<const double> path) const;
  /// Throws ContractError when the rule supplies no Jacobian.
  void coefficients_and_jacobian(std::span<const double> path, Eigen::VectorXd& coeffs,
                                 Eigen::MatrixXd& jacobian) const;
  /// u(path) = sum_j a_j d_j.
  CMElement element(std::span<const double> path) const;

 private:
  GramContext ctx_;
  Eigen::MatrixXd directions_;
  Eigen::MatrixXd gram_directions_;
  Rule rule_;
  bool random_;
  std::vector<std::size_t> slot_prefix_;
  bool finite_difference_ = false;
};

/// Alias used where a field is adapted by construction.
using AdaptedVectorField = VectorField;

/// Columns d_j = k_{t_j} - k_{t_{j-1}} for j = 1..n (k_{t_0} = 0).
Eigen::MatrixXd increment_directions(std::size_t n);

struct DivergenceTerms {
  double integral = 0.0;    // sum_j a_j I(d_j)
  double correction = 0.0;  // sum_j <D a_j, d_j>
  double value() const noexcept { return integral - correction; }
};

DivergenceTerms divergence_terms(const VectorField& u, std::span<const double> path);
double divergence(const VectorField& u, std::span<const double> path);
/// <h, u(path)> in the energy space.
double pairing(const VectorField& u, std::span<const double> path, const CMElement& h);

/// Conditional law of a functional's features z given the first p coordinates,
/// with cached regression maps so that per-path work is a dot product plus
/// low-dimensional quadrature.
class FeatureConditioning {
 public:
  FeatureConditioning(const GramContext& ctx, const CylindricalFunctional& f, AdaptedIndex p,
                      ExpectationMethod method = ExpectationMethod::quadrature());

  std::size_t observed() const noexcept { return observed_; }
  /// p x arity: E[z | prefix] = mean_map^T prefix.
  const Eigen::MatrixXd& mean_map() const noexcept { return mean_map_; }
  const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }

  Eigen::VectorXd mean(std::span<const double> prefix) const;
  double expected_value(std::span<const double> prefix) const;
  Eigen::VectorXd expected_gradient(std::span<const double> prefix) const;
  /// Requires f.has_hessian().
  Eigen::MatrixXd expected_hessian(std::span<const double> prefix) const;

 private:
  template <class Fn>
  void integrate(const Eigen::VectorXd& mean, Fn&& fn) const;

  CylindricalFunctional f_;
  std::size_t observed_;
  ExpectationMethod method_;
  Eigen::MatrixXd mean_map_;
  Eigen::MatrixXd covariance_;
  Eigen::VectorXd sd_;      // additive: per-feature conditional standard deviation
  Eigen::MatrixXd factor_;  // general: whitening factor of the covariance
  Eigen::MatrixXd mc_normals_;
};

/// E[F | X_1..X_j = prefix].
double conditional_functional_mean(const GramContext& ctx, const CylindricalFunctional& f, AdaptedIndex j,
                                   std::span<const double> prefix,
                                   const ExpectationMethod& method = ExpectationMethod::quadrature());

/// Sum_k E[(W^T grad f)_k | prefix] P_j k_{t_{c_k}}: supported on the first j coordinates.
CMElement predictable_projection(const GramContext& ctx, const CylindricalFunctional& f, AdaptedIndex j,
                                 std::span<const double> prefix,
                                 const ExpectationMethod& method = ExpectationMethod::quadrature());

struct ClarkOptions {
  ExpectationMethod method = ExpectationMethod::quadrature();
};

/// Adapted integrand with delta(u) ~ F - E[F].
///
/// Slot j (or block b of the component system) uses the innovation direction
/// e_j = k_{t_j} - P_{j-1} k_{t_j} and the coefficient solving
/// <E[DF | X_1..X_{j-1}], e_j> = a_j |e_j|^2, i.e. u = sum_j (P_j - P_{j-1}) E[DF | F_{j-1}].
/// Linear functionals are reproduced exactly for every Hurst index; at H = 1/2
/// the innovations are the increments and this is the Euler Clark-Ocone scheme.
AdaptedVectorField clark_integrand(const GramContext& ctx, const CylindricalFunctional& f,
                                   const ClarkOptions& options = {});

/// Largest change of any adapted slot coefficient when coordinates at and
/// after the slot are resampled. Zero for a predictable field.
double predictability_deviation(const AdaptedVectorField& u, std::span<const double> path, std::uint64_t seed);

}  // namespace roughop
