#include "roughop/functional.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "roughop/errors.hpp"
#include "roughop/rng.hpp"

namespace roughop {

namespace {

constexpr double kFdStep = 1e-5;

void check_indices(const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw DimensionError("functional reads no coordinates");
  std::vector<std::size_t> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() == 0) throw DomainError("functional coordinates are 1-based");
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DomainError("functional coordinates must be distinct");
}

}  // namespace

CylindricalFunctional CylindricalFunctional::additive(std::string name, std::vector<std::size_t> indices,
                                                      std::vector<ScalarTerm> terms, double constant) {
  check_indices(indices);
  if (terms.size() != indices.size()) throw DimensionError("one additive term per coordinate required");
  for (const auto& t : terms)
    if (!t.value || !t.first || !t.second) throw ContractError("additive term needs phi, phi' and phi''");
  auto s = std::make_shared<State>();
  s->name = std::move(name);
  s->arity = indices.size();
  s->indices = std::move(indices);
  s->additive = true;
  s->terms = std::move(terms);
  s->constant = constant;
  return CylindricalFunctional(std::move(s));
}

CylindricalFunctional CylindricalFunctional::general(std::string name, std::vector<std::size_t> indices,
                                                     ValueMap value, GradientMap gradient, HessianMap hessian) {
  check_indices(indices);
  if (!value) throw ContractError("functional needs a value map");
  auto s = std::make_shared<State>();
  s->name = std::move(name);
  s->arity = indices.size();
  s->indices = std::move(indices);
  s->value = std::move(value);
  s->gradient = std::move(gradient);
  s->hessian = std::move(hessian);
  return CylindricalFunctional(std::move(s));
}

CylindricalFunctional CylindricalFunctional::with_mixing(std::vector<std::size_t> coords,
                                                         Eigen::MatrixXd mixing) const {
  check_indices(coords);
  if (static_cast<std::size_t>(mixing.rows()) != state_->arity ||
      static_cast<std::size_t>(mixing.cols()) != coords.size())
    throw DimensionError("mixing matrix must be arity x coordinates");
  auto s = std::make_shared<State>(*state_);
  s->indices = std::move(coords);
  s->mixing = std::move(mixing);
  return CylindricalFunctional(std::move(s));
}

Eigen::MatrixXd CylindricalFunctional::mixing() const {
  if (has_mixing()) return state_->mixing;
  const auto n = static_cast<Eigen::Index>(state_->arity);
  return Eigen::MatrixXd::Identity(n, n);
}

double CylindricalFunctional::value(std::span<const double> z) const {
  if (z.size() != state_->arity) throw DimensionError("feature vector has wrong length");
  if (!state_->additive) return state_->value(z);
  double v = state_->constant;
  for (std::size_t l = 0; l < z.size(); ++l) v += state_->terms[l].value(z[l]);
  return v;
}

void CylindricalFunctional::gradient(std::span<const double> z, std::span<double> out) const {
  if (z.size() != state_->arity || out.size() != state_->arity) throw DimensionError("gradient has wrong length");
  if (state_->additive) {
    for (std::size_t l = 0; l < z.size(); ++l) out[l] = state_->terms[l].first(z[l]);
    return;
  }
  if (state_->gradient) {
    state_->gradient(z, out);
    return;
  }
  std::vector<double> w(z.begin(), z.end());
  for (std::size_t l = 0; l < z.size(); ++l) {
    w[l] = z[l] + kFdStep;
    const double up = state_->value(w);
    w[l] = z[l] - kFdStep;
    const double down = state_->value(w);
    w[l] = z[l];
    out[l] = (up - down) / (2.0 * kFdStep);
  }
}

void CylindricalFunctional::hessian(std::span<const double> z, Eigen::Ref<Eigen::MatrixXd> out) const {
  const auto n = static_cast<Eigen::Index>(state_->arity);
  if (z.size() != state_->arity || out.rows() != n || out.cols() != n)
    throw DimensionError("hessian has wrong shape");
  if (state_->additive) {
    out.setZero();
    for (std::size_t l = 0; l < z.size(); ++l) {
      const auto i = static_cast<Eigen::Index>(l);
      out(i, i) = state_->terms[l].second(z[l]);
    }
    return;
  }
  if (!state_->hessian) throw ContractError("functional '" + state_->name + "' has no hessian");
  state_->hessian(z, out);
}

void CylindricalFunctional::features(std::span<const double> path, std::span<double> z) const {
  if (z.size() != state_->arity) throw DimensionError("feature buffer has wrong length");
  const auto& idx = state_->indices;
  for (std::size_t c : idx)
    if (c > path.size()) throw DimensionError("functional reads beyond the path");
  if (!has_mixing()) {
    for (std::size_t l = 0; l < idx.size(); ++l) z[l] = path[idx[l] - 1];
    return;
  }
  const auto& w = state_->mixing;
  for (std::size_t l = 0; l < z.size(); ++l) {
    double v = 0.0;
    for (std::size_t c = 0; c < idx.size(); ++c) v += w(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(c)) * path[idx[c] - 1];
    z[l] = v;
  }
}

double CylindricalFunctional::evaluate(std::span<const double> path) const {
  std::vector<double> z(state_->arity);
  features(path, z);
  return value(z);
}

CylindricalFunctional combine(double a, const CylindricalFunctional& f, double b, const CylindricalFunctional& g) {
  std::vector<std::size_t> coords = f.indices();
  for (std::size_t c : g.indices())
    if (std::find(coords.begin(), coords.end(), c) == coords.end()) coords.push_back(c);
  const auto nc = static_cast<Eigen::Index>(coords.size());
  auto placement = [&](const CylindricalFunctional& h) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(h.indices().size()), nc);
    for (std::size_t i = 0; i < h.indices().size(); ++i) {
      const auto pos = std::find(coords.begin(), coords.end(), h.indices()[i]) - coords.begin();
      p(static_cast<Eigen::Index>(i), pos) = 1.0;
    }
    return Eigen::MatrixXd(h.mixing() * p);  // features of h as a map of the joint coordinates
  };
  const Eigen::MatrixXd wf = placement(f);
  const Eigen::MatrixXd wg = placement(g);
  const auto nf = wf.rows();
  const auto ng = wg.rows();
  Eigen::MatrixXd w(nf + ng, nc);
  w << wf, wg;

  const bool hess = f.has_hessian() && g.has_hessian();
  auto value = [f, g, a, b, nf](std::span<const double> z) {
    return a * f.value(z.first(static_cast<std::size_t>(nf))) + b * g.value(z.subspan(static_cast<std::size_t>(nf)));
  };
  auto gradient = [f, g, a, b, nf](std::span<const double> z, std::span<double> out) {
    const auto k = static_cast<std::size_t>(nf);
    f.gradient(z.first(k), out.first(k));
    g.gradient(z.subspan(k), out.subspan(k));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= i < k ? a : b;
  };
  CylindricalFunctional::HessianMap hessian;
  if (hess) {
    hessian = [f, g, a, b, nf, ng](std::span<const double> z, Eigen::Ref<Eigen::MatrixXd> out) {
      const auto k = static_cast<std::size_t>(nf);
      out.setZero();
      Eigen::MatrixXd hf(nf, nf), hg(ng, ng);
      f.hessian(z.first(k), hf);
      g.hessian(z.subspan(k), hg);
      out.topLeftCorner(nf, nf) = a * hf;
      out.bottomRightCorner(ng, ng) = b * hg;
    };
  }
  // Feature arity nf+ng, driven by coordinates through w.
  std::vector<std::size_t> feature_slots(static_cast<std::size_t>(nf + ng));
  for (std::size_t i = 0; i < feature_slots.size(); ++i) feature_slots[i] = i + 1;
  auto base = CylindricalFunctional::general(f.name() + "+" + g.name(), feature_slots, value, gradient, hessian);
  if (f.finite_difference_gradient() || g.finite_difference_gradient()) {
    // Keep the flag visible: drop the analytic gradient so callers see finite differences.
    base = CylindricalFunctional::general(f.name() + "+" + g.name(), feature_slots, value, {}, hessian);
  }
  return base.with_mixing(std::move(coords), std::move(w));
}

CylindricalFunctional lift_to_components(const CylindricalFunctional& f, double alpha, double beta) {
  std::vector<std::size_t> coords;
  coords.reserve(2 * f.indices().size());
  for (std::size_t i : f.indices()) {
    coords.push_back(2 * i - 1);
    coords.push_back(2 * i);
  }
  const Eigen::MatrixXd m = f.mixing();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m.rows(), 2 * m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    w.col(2 * c) = alpha * m.col(c);
    w.col(2 * c + 1) = beta * m.col(c);
  }
  return f.with_mixing(std::move(coords), std::move(w));
}

std::vector<double> trapezoid_weights(const TimeGrid& grid) {
  const std::size_t n = grid.size();
  if (std::abs(grid.time(n) - grid.horizon()) > 1e-12 * grid.horizon())
    throw DomainError("integral functionals need a grid ending at the horizon");
  std::vector<double> w(n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double right = k < n ? grid.time(k + 1) : grid.time(k);
    w[k - 1] = 0.5 * (right - grid.time(k - 1));
  }
  return w;
}

CylindricalFunctional discretize_integral_functional(const IntegralFunctional& functional, const TimeGrid& grid) {
  if (!functional.g || !functional.dg || !functional.d2g)
    throw ContractError("integral functional needs g, dg and d2g");
  const std::vector<double> w = trapezoid_weights(grid);
  std::vector<std::size_t> indices(grid.size());
  std::vector<ScalarTerm> terms(grid.size());
  for (std::size_t k = 1; k <= grid.size(); ++k) {
    indices[k - 1] = k;
    const double t = grid.time(k);
    const double wk = w[k - 1];
    const auto g = functional.g;
    const auto dg = functional.dg;
    const auto d2g = functional.d2g;
    terms[k - 1] = ScalarTerm{[g, t, wk](double x) { return wk * g(t, x); },
                              [dg, t, wk](double x) { return wk * dg(t, x); },
                              [d2g, t, wk](double x) { return wk * d2g(t, x); }};
  }
  const double c0 = 0.5 * grid.time(1) * functional.g(0.0, 0.0);
  return CylindricalFunctional::additive(functional.name, std::move(indices), std::move(terms), c0);
}

GradientCheck gradient_check(const CylindricalFunctional& f, std::uint64_t seed) {
  constexpr std::size_t kPoints = 100;
  constexpr double kTolerance = 1e-4;
  const std::size_t n = f.arity();
  RngStream rng(seed, 0x67726164ULL);
  GradientCheck report;
  std::vector<double> z(n), g(n), w(n);
  for (std::size_t p = 0; p < kPoints; ++p) {
    for (double& x : z) x = -3.0 + 6.0 * rng.uniform();
    f.gradient(z, g);
    w = z;
    for (std::size_t l = 0; l < n; ++l) {
      w[l] = z[l] + kFdStep;
      const double up = f.value(w);
      w[l] = z[l] - kFdStep;
      const double down = f.value(w);
      w[l] = z[l];
      const double fd = (up - down) / (2.0 * kFdStep);
      const double scale = std::max({std::abs(fd), std::abs(g[l]), 1e-6});
      report.max_relative_deviation = std::max(report.max_relative_deviation, std::abs(fd - g[l]) / scale);
    }
  }
  report.points = kPoints;
  report.passed = report.max_relative_deviation <= kTolerance;
  return report;
}

namespace {

std::size_t snapped(const TimeGrid& grid, double t, const std::string& name, std::vector<std::string>* warnings) {
  if (auto exact = grid.find_index(t)) return *exact;
  const std::size_t i = grid.nearest_index(t);
  if (warnings) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: time %.6g is not a grid point, snapped to %.6g", name.c_str(), t,
                  grid.time(i));
    warnings->emplace_back(buf);
  }
  return i;
}

ScalarTerm scaled(ScalarTerm base, double c) {
  return {[v = base.value, c](double x) { return c * v(x); }, [d = base.first, c](double x) { return c * d(x); },
          [d2 = base.second, c](double x) { return c * d2(x); }};
}

const ScalarTerm kSquare{[](double x) { return x * x; }, [](double x) { return 2.0 * x; },
                         [](double) { return 2.0; }};
const ScalarTerm kSin{[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
                      [](double x) { return -std::sin(x); }};
const ScalarTerm kCos{[](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); },
                      [](double x) { return -std::cos(x); }};
const ScalarTerm kIdentity{[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
const ScalarTerm kExp{[](double x) { return std::exp(x); }, [](double x) { return std::exp(x); },
                      [](double x) { return std::exp(x); }};

const std::map<std::string, std::string>& descriptions() {
  static const std::map<std::string, std::string> d{
      {"quadratic", "X_T^2"},
      {"two_time", "sin(X_{T/2}) + cos(X_T)"},
      {"integral_sin", "int_0^T sin(X_s) ds (trapezoid on the grid)"},
      {"integral_square", "int_0^T X_s^2 ds (trapezoid on the grid)"},
      {"linear", "X_{T/2} + 2 X_T"},
      {"terminal_exp", "exp(X_T)"},
  };
  return d;
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"quadratic", "two_time", "integral_sin", "integral_square", "linear", "terminal_exp"};
}

std::string catalog_description(const std::string& name) {
  const auto& d = descriptions();
  auto it = d.find(name);
  if (it == d.end()) throw ConfigError("unknown functional '" + name + "'");
  return it->second;
}

CylindricalFunctional make_functional(const std::string& name, const TimeGrid& grid,
                                      std::vector<std::string>* warnings) {
  const double T = grid.horizon();
  if (name == "quadratic") {
    return CylindricalFunctional::additive(name, {snapped(grid, T, name, warnings)}, {kSquare});
  }
  if (name == "terminal_exp") {
    return CylindricalFunctional::additive(name, {snapped(grid, T, name, warnings)}, {kExp});
  }
  if (name == "two_time" || name == "linear") {
    const std::size_t a = snapped(grid, 0.5 * T, name, warnings);
    const std::size_t b = snapped(grid, T, name, warnings);
    if (a == b) throw DomainError(name + ": grid too coarse to separate T/2 and T");
    if (name == "two_time") return CylindricalFunctional::additive(name, {a, b}, {kSin, kCos});
    return CylindricalFunctional::additive(name, {a, b}, {kIdentity, scaled(kIdentity, 2.0)});
  }
  if (name == "integral_sin") {
    return discretize_integral_functional(
        {name, [](double, double x) { return std::sin(x); }, [](double, double x) { return std::cos(x); },
         [](double, double x) { return -std::sin(x); }},
        grid);
  }
  if (name == "integral_square") {
    return discretize_integral_functional({name, [](double, double x) { return x * x; },
                                           [](double, double x) { return 2.0 * x; }, [](double, double) { return 2.0; }},
                                          grid);
  }
  throw ConfigError("unknown functional '" + name + "'");
}

}  // namespace roughop
