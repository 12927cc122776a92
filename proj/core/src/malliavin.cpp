#include "roughop/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "roughop/errors.hpp"
#include "roughop/quadrature.hpp"
#include "roughop/rng.hpp"

namespace roughop {

namespace {

constexpr double kFdStep = 1e-5;

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

}  // namespace

CMElement derivative(const CylindricalFunctional& f, std::span<const double> path) {
  const std::size_t n = f.arity();
  std::vector<double> z(n), g(n);
  f.features(path, z);
  f.gradient(z, g);
  CMElement out = CMElement::zero(path.size());
  const auto& idx = f.indices();
  if (!f.has_mixing()) {
    for (std::size_t l = 0; l < n; ++l) out.coeffs()[static_cast<Eigen::Index>(idx[l] - 1)] = g[l];
    return out;
  }
  const Eigen::VectorXd coord_grad = f.mixing().transpose() * as_vector(g);
  for (std::size_t c = 0; c < idx.size(); ++c)
    out.coeffs()[static_cast<Eigen::Index>(idx[c] - 1)] = coord_grad[static_cast<Eigen::Index>(c)];
  return out;
}

// ---------------------------------------------------------------------------
// Vector fields

VectorField::VectorField(const GramContext& ctx, Eigen::MatrixXd directions, Rule rule, bool random,
                         std::vector<std::size_t> slot_prefix)
    : ctx_(ctx), directions_(std::move(directions)), rule_(std::move(rule)), random_(random),
      slot_prefix_(std::move(slot_prefix)) {
  if (static_cast<std::size_t>(directions_.rows()) != ctx_.dim())
    throw DimensionError("field directions must have one row per grid coordinate");
  if (!rule_) throw ContractError("vector field needs a coefficient rule");
  if (!slot_prefix_.empty() && slot_prefix_.size() != slots())
    throw DimensionError("slot prefix list must have one entry per slot");
  gram_directions_ = ctx_.sigma() * directions_;
}

VectorField VectorField::deterministic(const GramContext& ctx, const CMElement& h) {
  if (h.size() != ctx.dim()) throw DimensionError("deterministic field: element size differs from grid");
  Rule rule = [](std::span<const double>, Eigen::Ref<Eigen::VectorXd> a, Eigen::MatrixXd* jac) {
    a[0] = 1.0;
    if (jac) jac->setZero();
    return true;
  };
  return VectorField(ctx, h.coeffs(), std::move(rule), false, {0});
}

VectorField VectorField::affine(const GramContext& ctx, Eigen::MatrixXd directions, Eigen::VectorXd offset,
                                Eigen::MatrixXd slope, std::vector<std::size_t> slot_prefix) {
  const Eigen::Index j = directions.cols();
  if (offset.size() != j || slope.rows() != j || slope.cols() != static_cast<Eigen::Index>(ctx.dim()))
    throw DimensionError("affine field: offset is slots, slope is slots x dim");
  for (std::size_t s = 0; s < slot_prefix.size(); ++s) {
    const auto row = static_cast<Eigen::Index>(s);
    const auto p = static_cast<Eigen::Index>(slot_prefix[s]);
    if (p < slope.cols() && slope.row(row).tail(slope.cols() - p).cwiseAbs().maxCoeff() > 0.0)
      throw ContractError("affine field declared adapted but slot " + std::to_string(s + 1) +
                          " reads coordinates beyond its prefix");
  }
  const bool random = slope.size() > 0 && slope.cwiseAbs().maxCoeff() > 0.0;
  auto p = std::make_shared<const Eigen::VectorXd>(std::move(offset));
  auto q = std::make_shared<const Eigen::MatrixXd>(std::move(slope));
  Rule rule = [p, q](std::span<const double> path, Eigen::Ref<Eigen::VectorXd> a, Eigen::MatrixXd* jac) {
    a.noalias() = *p + *q * as_vector(path);
    if (jac) *jac = *q;
    return true;
  };
  return VectorField(ctx, std::move(directions), std::move(rule), random, std::move(slot_prefix));
}

VectorField VectorField::with_finite_difference_jacobian() const {
  Rule base = rule_;
  const Eigen::Index slots_n = directions_.cols();
  Rule rule = [base, slots_n](std::span<const double> path, Eigen::Ref<Eigen::VectorXd> a, Eigen::MatrixXd* jac) {
    base(path, a, nullptr);
    if (!jac) return true;
    const auto n = static_cast<Eigen::Index>(path.size());
    jac->resize(slots_n, n);
    std::vector<double> x(path.begin(), path.end());
    Eigen::VectorXd up(slots_n), down(slots_n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto ks = static_cast<std::size_t>(k);
      x[ks] = path[ks] + kFdStep;
      base(x, up, nullptr);
      x[ks] = path[ks] - kFdStep;
      base(x, down, nullptr);
      x[ks] = path[ks];
      jac->col(k) = (up - down) / (2.0 * kFdStep);
    }
    return true;
  };
  VectorField out(ctx_, directions_, std::move(rule), random_, slot_prefix_);
  out.finite_difference_ = true;
  return out;
}

Eigen::VectorXd VectorField::coefficients(std::span<const double> path) const {
  if (path.size() != dim()) throw DimensionError("path length differs from field dimension");
  Eigen::VectorXd a(directions_.cols());
  rule_(path, a, nullptr);
  return a;
}

void VectorField::coefficients_and_jacobian(std::span<const double> path, Eigen::VectorXd& coeffs,
                                            Eigen::MatrixXd& jacobian) const {
  if (path.size() != dim()) throw DimensionError("path length differs from field dimension");
  coeffs.resize(directions_.cols());
  jacobian.setZero(directions_.cols(), directions_.rows());
  if (!rule_(path, coeffs, &jacobian)) {
    if (random_) throw ContractError("random field coefficients have no gradient rule");
    jacobian.setZero();
  }
}

CMElement VectorField::element(std::span<const double> path) const {
  return CMElement(directions_ * coefficients(path));
}

Eigen::MatrixXd increment_directions(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    d(j, j) = 1.0;
    if (j > 0) d(j - 1, j) = -1.0;
  }
  return d;
}

DivergenceTerms divergence_terms(const VectorField& u, std::span<const double> path) {
  DivergenceTerms t;
  const auto x = as_vector(path);
  if (!u.random()) {
    t.integral = u.coefficients(path).dot(u.directions().transpose() * x);
    return t;
  }
  Eigen::VectorXd a;
  Eigen::MatrixXd jac;
  u.coefficients_and_jacobian(path, a, jac);
  t.integral = a.dot(u.directions().transpose() * x);
  // <D a_j, d_j> = sum_k (d a_j / d x_k) <k_{t_k}, d_j>
  const Eigen::MatrixXd& sd = u.gram_directions();
  for (Eigen::Index j = 0; j < jac.rows(); ++j) t.correction += jac.row(j).dot(sd.col(j));
  return t;
}

double divergence(const VectorField& u, std::span<const double> path) { return divergence_terms(u, path).value(); }

double pairing(const VectorField& u, std::span<const double> path, const CMElement& h) {
  if (h.size() != u.dim()) throw DimensionError("pairing: element size differs from field dimension");
  return u.coefficients(path).dot(u.gram_directions().transpose() * h.coeffs());
}

// ---------------------------------------------------------------------------
// Conditioning of functional features

FeatureConditioning::FeatureConditioning(const GramContext& ctx, const CylindricalFunctional& f, AdaptedIndex p,
                                         ExpectationMethod method)
    : f_(f), observed_(p.j), method_(method) {
  const std::size_t n = ctx.dim();
  if (p.j > n) throw DomainError("adapted index beyond grid size");
  const auto& idx = f.indices();
  for (std::size_t c : idx)
    if (c > n) throw DimensionError("functional reads beyond the grid");
  const Eigen::MatrixXd w = f.mixing();
  const auto arity = w.rows();
  const auto pp = static_cast<Eigen::Index>(p.j);

  std::vector<Eigen::Index> fut;
  mean_map_ = Eigen::MatrixXd::Zero(pp, arity);
  for (std::size_t c = 0; c < idx.size(); ++c) {
    if (idx[c] <= p.j)
      mean_map_.row(static_cast<Eigen::Index>(idx[c] - 1)) += w.col(static_cast<Eigen::Index>(c)).transpose();
    else
      fut.push_back(static_cast<Eigen::Index>(c));
  }
  const auto nf = static_cast<Eigen::Index>(fut.size());
  covariance_ = Eigen::MatrixXd::Zero(arity, arity);
  if (nf > 0) {
    const Eigen::MatrixXd& sigma = ctx.sigma();
    Eigen::MatrixXd wf(arity, nf), cross(pp, nf), block(nf, nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      wf.col(a) = w.col(fut[static_cast<std::size_t>(a)]);
      const auto ia = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(fut[static_cast<std::size_t>(a)])] - 1);
      for (Eigen::Index r = 0; r < pp; ++r) cross(r, a) = sigma(r, ia);
      for (Eigen::Index b = 0; b < nf; ++b)
        block(a, b) = sigma(ia, static_cast<Eigen::Index>(idx[static_cast<std::size_t>(fut[static_cast<std::size_t>(b)])] - 1));
    }
    Eigen::MatrixXd schur = block;
    if (pp > 0) {
      const Eigen::MatrixXd bm = ctx.solve_leading(p.j, cross);
      mean_map_ += bm * wf.transpose();
      schur -= cross.transpose() * bm;
    }
    covariance_ = wf * schur * wf.transpose();
    covariance_ = 0.5 * (covariance_ + covariance_.transpose());
  }

  if (f.is_additive()) {
    sd_ = covariance_.diagonal().cwiseMax(0.0).cwiseSqrt();
    return;
  }
  factor_ = whitening_factor(covariance_);
  if (factor_.cols() == 0) return;
  if (method_.kind == ExpectationMethod::Kind::quadrature) {
    if (static_cast<std::size_t>(factor_.cols()) > kMaxQuadratureDims)
      throw UnsupportedError("functional '" + f.name() + "' has " + std::to_string(factor_.cols()) +
                             " future dimensions; quadrature is limited to 4, use Monte Carlo");
  } else {
    if (method_.samples < 2) throw DomainError("Monte Carlo conditioning needs at least 2 samples");
    // Common random numbers: the same normals for every prefix keep a_j smooth in the path.
    RngStream rng(method_.seed, method_.stream);
    mc_normals_.resize(factor_.cols(), static_cast<Eigen::Index>(method_.samples));
    for (Eigen::Index s = 0; s < mc_normals_.cols(); ++s)
      for (Eigen::Index d = 0; d < mc_normals_.rows(); ++d) mc_normals_(d, s) = rng.normal();
  }
}

Eigen::VectorXd FeatureConditioning::mean(std::span<const double> prefix) const {
  if (prefix.size() != observed_) throw DimensionError("prefix length must equal the adapted index");
  if (observed_ == 0) return Eigen::VectorXd::Zero(mean_map_.cols());
  return mean_map_.transpose() * as_vector(prefix);
}

template <class Fn>
void FeatureConditioning::integrate(const Eigen::VectorXd& mean, Fn&& fn) const {
  const Eigen::Index dims = factor_.cols();
  std::vector<double> z(static_cast<std::size_t>(mean.size()));
  auto emit = [&](const Eigen::VectorXd& point, double weight) {
    for (Eigen::Index i = 0; i < point.size(); ++i) z[static_cast<std::size_t>(i)] = point[i];
    fn(std::span<const double>(z), weight);
  };
  if (dims == 0) {
    emit(mean, 1.0);
    return;
  }
  if (method_.kind == ExpectationMethod::Kind::monte_carlo) {
    const double w = 1.0 / static_cast<double>(mc_normals_.cols());
    for (Eigen::Index s = 0; s < mc_normals_.cols(); ++s) emit(mean + factor_ * mc_normals_.col(s), w);
    return;
  }
  const GaussHermiteRule& rule = gauss_hermite(method_.nodes);
  const std::size_t nodes = rule.nodes.size();
  std::vector<std::size_t> counter(static_cast<std::size_t>(dims), 0);
  Eigen::VectorXd u(dims);
  while (true) {
    double weight = 1.0;
    for (Eigen::Index d = 0; d < dims; ++d) {
      u[d] = rule.nodes[counter[static_cast<std::size_t>(d)]];
      weight *= rule.weights[counter[static_cast<std::size_t>(d)]];
    }
    emit(mean + factor_ * u, weight);
    std::size_t d = 0;
    while (d < counter.size() && ++counter[d] == nodes) counter[d++] = 0;
    if (d == counter.size()) break;
  }
}

namespace {

// E[h(m + s Z)] for one additive term, by 1-D Gauss-Hermite.
template <class H>
double term_expectation(const H& h, double m, double s, const GaussHermiteRule& rule) {
  if (s == 0.0) return h(m);
  double total = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) total += rule.weights[q] * h(m + s * rule.nodes[q]);
  return total;
}

}  // namespace

double FeatureConditioning::expected_value(std::span<const double> prefix) const {
  const Eigen::VectorXd m = mean(prefix);
  if (f_.is_additive()) {
    const GaussHermiteRule& rule = gauss_hermite(method_.kind == ExpectationMethod::Kind::quadrature ? method_.nodes
                                                                                                  : kDefaultHermiteNodes);
    double v = f_.constant();
    for (Eigen::Index l = 0; l < m.size(); ++l)
      v += term_expectation(f_.term(static_cast<std::size_t>(l)).value, m[l], sd_[l], rule);
    return v;
  }
  double v = 0.0;
  integrate(m, [&](std::span<const double> z, double w) { v += w * f_.value(z); });
  return v;
}

Eigen::VectorXd FeatureConditioning::expected_gradient(std::span<const double> prefix) const {
  const Eigen::VectorXd m = mean(prefix);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m.size());
  if (f_.is_additive()) {
    const GaussHermiteRule& rule = gauss_hermite(method_.kind == ExpectationMethod::Kind::quadrature ? method_.nodes
                                                                                                  : kDefaultHermiteNodes);
    for (Eigen::Index l = 0; l < m.size(); ++l)
      g[l] = term_expectation(f_.term(static_cast<std::size_t>(l)).first, m[l], sd_[l], rule);
    return g;
  }
  std::vector<double> buf(static_cast<std::size_t>(m.size()));
  integrate(m, [&](std::span<const double> z, double w) {
    f_.gradient(z, buf);
    g += w * as_vector(buf);
  });
  return g;
}

Eigen::MatrixXd FeatureConditioning::expected_hessian(std::span<const double> prefix) const {
  if (!f_.has_hessian()) throw ContractError("functional '" + f_.name() + "' has no hessian");
  const Eigen::VectorXd m = mean(prefix);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m.size(), m.size());
  if (f_.is_additive()) {
    const GaussHermiteRule& rule = gauss_hermite(method_.kind == ExpectationMethod::Kind::quadrature ? method_.nodes
                                                                                                  : kDefaultHermiteNodes);
    for (Eigen::Index l = 0; l < m.size(); ++l)
      h(l, l) = term_expectation(f_.term(static_cast<std::size_t>(l)).second, m[l], sd_[l], rule);
    return h;
  }
  Eigen::MatrixXd buf(m.size(), m.size());
  integrate(m, [&](std::span<const double> z, double w) {
    f_.hessian(z, buf);
    h += w * buf;
  });
  return h;
}

double conditional_functional_mean(const GramContext& ctx, const CylindricalFunctional& f, AdaptedIndex j,
                                   std::span<const double> prefix, const ExpectationMethod& method) {
  return FeatureConditioning(ctx, f, j, method).expected_value(prefix);
}

CMElement predictable_projection(const GramContext& ctx, const CylindricalFunctional& f, AdaptedIndex j,
                                 std::span<const double> prefix, const ExpectationMethod& method) {
  const FeatureConditioning cond(ctx, f, j, method);
  const Eigen::VectorXd coord_grad = f.mixing().transpose() * cond.expected_gradient(prefix);
  CMElement g = CMElement::zero(ctx.dim());
  const auto& idx = f.indices();
  for (std::size_t c = 0; c < idx.size(); ++c)
    g.coeffs()[static_cast<Eigen::Index>(idx[c] - 1)] = coord_grad[static_cast<Eigen::Index>(c)];
  return project_adapted(ctx, g, j);
}

// ---------------------------------------------------------------------------
// Clark integrand

namespace {

struct ClarkPlan {
  std::size_t dim = 0;
  std::size_t block = 1;
  std::vector<FeatureConditioning> conditioning;  // one per block, prefix = block start
  std::vector<Eigen::MatrixXd> gram_inverse;      // per block, innovations' Gram (pseudo-)inverse
  Eigen::MatrixXd omega;                          // slots x arity: <W^T e_l placed on coords, e_j>
  bool hessian = true;
};

}  // namespace

AdaptedVectorField clark_integrand(const GramContext& ctx, const CylindricalFunctional& f,
                                   const ClarkOptions& options) {
  const std::size_t n = ctx.dim();
  const std::size_t bs = ctx.block_size();
  if (n % bs != 0) throw DimensionError("grid dimension is not a multiple of the block size");
  const auto nn = static_cast<Eigen::Index>(n);
  const Eigen::MatrixXd& sigma = ctx.sigma();

  // Innovation directions, block by block.
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(nn, nn);
  std::vector<std::size_t> prefix(n);
  for (std::size_t b = 0; b * bs < n; ++b) {
    const std::size_t p = b * bs;
    const auto pp = static_cast<Eigen::Index>(p);
    for (std::size_t k = 0; k < bs; ++k) {
      const auto j = static_cast<Eigen::Index>(p + k);
      prefix[p + k] = p;
      e(j, j) = 1.0;
      if (p > 0) e.col(j).head(pp) = -ctx.solve_leading_vector(p, sigma.col(j).head(pp));
    }
  }

  auto plan = std::make_shared<ClarkPlan>();
  plan->dim = n;
  plan->block = bs;
  plan->hessian = f.has_hessian();
  const Eigen::MatrixXd sd = sigma * e;
  const Eigen::MatrixXd w = f.mixing();
  const auto& idx = f.indices();
  plan->omega = Eigen::MatrixXd::Zero(nn, w.rows());
  for (std::size_t c = 0; c < idx.size(); ++c)
    plan->omega += sd.row(static_cast<Eigen::Index>(idx[c] - 1)).transpose() *
                   w.col(static_cast<Eigen::Index>(c)).transpose();
  for (std::size_t b = 0; b * bs < n; ++b) {
    const auto p = static_cast<Eigen::Index>(b * bs);
    const auto k = static_cast<Eigen::Index>(bs);
    plan->conditioning.emplace_back(ctx, f, AdaptedIndex(b * bs), options.method);
    const Eigen::MatrixXd g = e.middleCols(p, k).transpose() * sd.middleCols(p, k);
    plan->gram_inverse.push_back(g.completeOrthogonalDecomposition().pseudoInverse());
  }

  VectorField::Rule rule = [plan](std::span<const double> path, Eigen::Ref<Eigen::VectorXd> a,
                                  Eigen::MatrixXd* jac) {
    const auto bs = static_cast<Eigen::Index>(plan->block);
    if (!plan->hessian && jac) return false;
    for (std::size_t b = 0; b < plan->conditioning.size(); ++b) {
      const auto p = static_cast<Eigen::Index>(b) * bs;
      const FeatureConditioning& cond = plan->conditioning[b];
      const auto prefix = path.first(static_cast<std::size_t>(p));
      const Eigen::MatrixXd& omega_b = plan->omega.middleRows(p, bs);
      const Eigen::VectorXd s = omega_b * cond.expected_gradient(prefix);
      a.segment(p, bs) = plan->gram_inverse[b] * s;
      if (jac && p > 0) {
        // d/dx E[grad f | prefix] = E[hess f] * d mean / dx.
        const Eigen::MatrixXd ds = omega_b * cond.expected_hessian(prefix) * cond.mean_map().transpose();
        jac->block(p, 0, bs, p) = plan->gram_inverse[b] * ds;
      }
    }
    return true;
  };
  AdaptedVectorField u(ctx, std::move(e), std::move(rule), true, std::move(prefix));
  if (!f.has_hessian()) return u.with_finite_difference_jacobian();
  return u;
}

double predictability_deviation(const AdaptedVectorField& u, std::span<const double> path, std::uint64_t seed) {
  if (!u.adapted()) throw ContractError("predictability check needs an adapted field");
  const Eigen::VectorXd a = u.coefficients(path);
  RngStream rng(seed, 0x70726564ULL);
  std::vector<double> other(path.begin(), path.end());
  double worst = 0.0;
  for (std::size_t j = 0; j < u.slots(); ++j) {
    const std::size_t p = u.slot_prefix()[j];
    std::copy(path.begin(), path.end(), other.begin());
    for (std::size_t k = p; k < other.size(); ++k) other[k] = rng.normal();
    const Eigen::VectorXd b = u.coefficients(other);
    worst = std::max(worst, std::abs(a[static_cast<Eigen::Index>(j)] - b[static_cast<Eigen::Index>(j)]));
  }
  return worst;
}

}  // namespace roughop
