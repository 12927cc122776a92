#pragma once

// Cylindrical functionals F = f(z), z = W * (X_{i_1}, ..., X_{i_k}).
// W is the identity unless the functional was lifted onto a component
// system, where z_l = alpha * B_{t_l} + beta * B^H_{t_l}.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roughop/model.hpp"

namespace roughop {

/// One additive term phi with phi' and phi''.
struct ScalarTerm {
  std::function<double(double)> value;
  std::function<double(double)> first;
  std::function<double(double)> second;
};

class CylindricalFunctional {
 public:
  using ValueMap = std::function<double(std::span<const double>)>;
  using GradientMap = std::function<void(std::span<const double>, std::span<double>)>;
  using HessianMap = std::function<void(std::span<const double>, Eigen::Ref<Eigen::MatrixXd>)>;

  /// F = constant + sum_l terms[l](X_{indices[l]}).
  static CylindricalFunctional additive(std::string name, std::vector<std::size_t> indices,
                                        std::vector<ScalarTerm> terms, double constant = 0.0);

  /// General smooth f. Without `gradient`, central differences (step 1e-5) are
  /// used and the functional is flagged; `hessian` is optional.
  static CylindricalFunctional general(std::string name, std::vector<std::size_t> indices, ValueMap value,
                                       GradientMap gradient = {}, HessianMap hessian = {});

  /// Reads the same f through features z = mixing * X_{coords}; mixing is arity x coords.size().
  CylindricalFunctional with_mixing(std::vector<std::size_t> coords, Eigen::MatrixXd mixing) const;

  const std::string& name() const noexcept { return state_->name; }
  /// 1-based grid indices (coordinates) the functional reads.
  const std::vector<std::size_t>& indices() const noexcept { return state_->indices; }
  /// Number of features (arguments of f).
  std::size_t arity() const noexcept { return state_->arity; }
  bool is_additive() const noexcept { return state_->additive; }
  bool has_hessian() const noexcept { return state_->additive || static_cast<bool>(state_->hessian); }
  bool finite_difference_gradient() const noexcept { return !state_->additive && !state_->gradient; }
  bool has_mixing() const noexcept { return state_->mixing.size() > 0; }
  /// arity x indices().size(); identity when !has_mixing().
  Eigen::MatrixXd mixing() const;

  double value(std::span<const double> z) const;
  void gradient(std::span<const double> z, std::span<double> out) const;
  /// Requires has_hessian().
  void hessian(std::span<const double> z, Eigen::Ref<Eigen::MatrixXd> out) const;

  /// Additive functionals only.
  double constant() const noexcept { return state_->constant; }
  const ScalarTerm& term(std::size_t l) const { return state_->terms.at(l); }

  /// Features z of a full grid path.
  void features(std::span<const double> path, std::span<double> z) const;
  /// F on a full grid path.
  double evaluate(std::span<const double> path) const;

 private:
  struct State {
    std::string name;
    std::vector<std::size_t> indices;
    std::size_t arity = 0;
    bool additive = false;
    std::vector<ScalarTerm> terms;
    double constant = 0.0;
    ValueMap value;
    GradientMap gradient;
    HessianMap hessian;
    Eigen::MatrixXd mixing;  // empty: identity
  };
  explicit CylindricalFunctional(std::shared_ptr<const State> state) : state_(std::move(state)) {}
  std::shared_ptr<const State> state_;
};

/// a * F + b * G as a general functional on the union of their coordinates.
CylindricalFunctional combine(double a, const CylindricalFunctional& f, double b, const CylindricalFunctional& g);

/// Lifts F(X) with X = alpha * B + beta * B^H onto the interleaved component
/// system (coordinate 2i-1 is B_{t_i}, coordinate 2i is B^H_{t_i}).
CylindricalFunctional lift_to_components(const CylindricalFunctional& f, double alpha, double beta);

/// F = int_0^T g(s, X_s) ds.
struct IntegralFunctional {
  std::string name;
  std::function<double(double, double)> g;
  std::function<double(double, double)> dg;   // d/dx
  std::function<double(double, double)> d2g;  // d^2/dx^2
};

/// Grid-aligned trapezoid rule on {0, t_1, ..., t_N}; requires t_N = T.
/// Gives f(x) = sum_k w_k g(t_k, x_k) (+ the constant w_0 g(0, 0)).
CylindricalFunctional discretize_integral_functional(const IntegralFunctional& functional, const TimeGrid& grid);

/// Trapezoid weights w_1..w_N for the grid (the origin weight is dropped).
std::vector<double> trapezoid_weights(const TimeGrid& grid);

struct GradientCheck {
  double max_relative_deviation = 0.0;
  bool passed = true;
  std::size_t points = 0;
};

/// Compares the gradient with central differences (step 1e-5) at 100 random
/// points in [-3, 3]^n. Fails (without throwing) when the deviation exceeds 1e-4.
GradientCheck gradient_check(const CylindricalFunctional& f, std::uint64_t seed = 0);

/// Built-in catalog names, in report order.
std::vector<std::string> catalog_names();

/// Catalog functional on a grid. Catalog times that are not grid points are
/// snapped to the nearest one and a warning is appended.
CylindricalFunctional make_functional(const std::string& name, const TimeGrid& grid,
                                      std::vector<std::string>* warnings = nullptr);

/// Short description of a catalog entry.
std::string catalog_description(const std::string& name);

}  // namespace roughop
