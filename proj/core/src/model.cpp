#include "roughop/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "roughop/errors.hpp"

namespace roughop {

HurstParameter::HurstParameter(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) {
    std::ostringstream msg;
    msg << "Hurst parameter must lie in (0, 1), got " << value;
    throw DomainError(msg.str());
  }
}

TimeGrid::TimeGrid(std::vector<double> times, double horizon, bool uniform)
    : times_(std::move(times)), horizon_(horizon), uniform_(uniform) {}

TimeGrid TimeGrid::uniform(std::size_t n, double horizon) {
  if (n == 0) throw DomainError("uniform grid needs at least one point");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be a positive finite number");
  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i) {
    times[i] = horizon * static_cast<double>(i + 1) / static_cast<double>(n);
  }
  times.back() = horizon;
  return TimeGrid(std::move(times), horizon, true);
}

TimeGrid TimeGrid::from_times(std::vector<double> times, double horizon) {
  if (times.empty()) throw DomainError("grid needs at least one point");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be a positive finite number");
  if (!(times.front() > 0.0)) throw DomainError("grid times must be strictly positive (time 0 is excluded)");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw DomainError("grid times must be strictly increasing");
  }
  if (times.back() > horizon * (1.0 + 1e-12)) throw DomainError("last grid time exceeds the horizon");
  return TimeGrid(std::move(times), horizon, false);
}

double TimeGrid::time(std::size_t i) const {
  if (i == 0) return 0.0;
  if (i > times_.size()) throw DomainError("grid index out of range");
  return times_[i - 1];
}

std::size_t TimeGrid::nearest_index(double t) const {
  auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end()) return times_.size();
  std::size_t idx = static_cast<std::size_t>(it - times_.begin());
  if (idx > 0 && std::abs(times_[idx - 1] - t) <= std::abs(*it - t)) --idx;
  return idx + 1;
}

std::optional<std::size_t> TimeGrid::find_index(double t) const {
  const std::size_t i = nearest_index(t);
  if (std::abs(times_[i - 1] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
  return std::nullopt;
}

CovarianceModel::CovarianceModel(ModelKind kind, double hurst, double alpha, double beta)
    : kind_(kind), hurst_(hurst), alpha_(alpha), beta_(beta) {}

CovarianceModel CovarianceModel::brownian() { return CovarianceModel(ModelKind::brownian, 0.5, 1.0, 0.0); }

CovarianceModel CovarianceModel::fractional(HurstParameter hurst) {
  return CovarianceModel(ModelKind::fractional, hurst.value(), 0.0, 1.0);
}

CovarianceModel CovarianceModel::mixed(double alpha, double beta, HurstParameter hurst) {
  // Zero weights are accepted so that the degenerate mixtures can be run
  // through the same pipeline as the pure models.
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw DomainError("mixture weights alpha and beta must be finite and nonnegative");
  }
  if (alpha == 0.0 && beta == 0.0) throw DomainError("mixture weights cannot both vanish");
  return CovarianceModel(ModelKind::mixed, hurst.value(), alpha, beta);
}

std::string CovarianceModel::name() const {
  switch (kind_) {
    case ModelKind::brownian: return "bm";
    case ModelKind::fractional: return "fbm";
    case ModelKind::mixed: return "mixed";
  }
  return "unknown";
}

double fbm_covariance(double hurst, double t, double s) {
  const double two_h = 2.0 * hurst;
  return 0.5 * (std::pow(t, two_h) + std::pow(s, two_h) - std::pow(std::abs(t - s), two_h));
}

double CovarianceModel::operator()(double t, double s) const {
  switch (kind_) {
    case ModelKind::brownian: return std::min(t, s);
    case ModelKind::fractional: return fbm_covariance(hurst_, t, s);
    case ModelKind::mixed:
      return alpha_ * alpha_ * std::min(t, s) + beta_ * beta_ * fbm_covariance(hurst_, t, s);
  }
  return 0.0;
}

double covariance(const CovarianceModel& model, double t, double s) {
  if (t < 0.0 || s < 0.0) throw DomainError("covariance is only defined for nonnegative times");
  return model(t, s);
}

double increment_variance(const CovarianceModel& model, double s, double t) {
  if (s < 0.0) throw DomainError("increment_variance needs s >= 0");
  if (s > t) throw DomainError("increment_variance needs s <= t");
  if (s == t) return 0.0;
  return model(t, t) - 2.0 * model(t, s) + model(s, s);
}

GramMatrix factor_gram(Eigen::MatrixXd sigma, const std::string& what) {
  const Eigen::Index n = sigma.rows();
  if (n != sigma.cols()) throw DimensionError("Gram matrix must be square");
  GramMatrix out;
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) {
    out.chol = llt.matrixL();
    out.sigma = std::move(sigma);
    return out;
  }
  const double mean_diag = sigma.diagonal().mean();
  for (double eps = 1e-12; eps <= 1e-8 * 1.0000001; eps *= 10.0) {
    const double jitter = eps * mean_diag;
    Eigen::MatrixXd shifted = sigma;
    shifted.diagonal().array() += jitter;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) {
      out.chol = llt.matrixL();
      out.sigma = std::move(sigma);
      out.jitter_applied = jitter;
      return out;
    }
  }
  throw IllConditionedError("Gram factorization failed after jitter up to 1e-8*mean(diag) for " + what);
}

GramMatrix build_gram(const CovarianceModel& model, const TimeGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd sigma(n, n);
  const auto t = grid.times();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double r = model(t[i], t[j]);
      sigma(i, j) = r;
      sigma(j, i) = r;
    }
  }
  return factor_gram(std::move(sigma), describe(model) + " on " + describe(grid));
}

std::string describe(const CovarianceModel& model) {
  std::ostringstream out;
  out << model.name();
  if (model.kind() != ModelKind::brownian) out << "(H=" << model.hurst();
  if (model.kind() == ModelKind::mixed) out << ", alpha=" << model.alpha() << ", beta=" << model.beta();
  if (model.kind() != ModelKind::brownian) out << ")";
  return out.str();
}

std::string describe(const TimeGrid& grid) {
  std::ostringstream out;
  out << (grid.is_uniform() ? "uniform" : "explicit") << " grid, n=" << grid.size() << ", T=" << grid.horizon();
  return out.str();
}

}  // namespace roughop
