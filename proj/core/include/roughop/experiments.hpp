#pragma once

// Seed-deterministic experiments. Each returns a Report whose checks carry
// the asserted criteria; statistical failures are reported, never thrown.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roughop/config.hpp"
#include "roughop/gaussian.hpp"
#include "roughop/model.hpp"
#include "roughop/report.hpp"

namespace roughop {

struct RunOptions {
  std::size_t workers = 0;  // 0: default_workers()
  /// Where simulate writes binary ensembles when save_ensemble is set; empty disables.
  std::filesystem::path ensemble_dir;
};

/// Effective settings of one experiment: the config resolved for its scope.
struct ExperimentConfig {
  std::string scope;
  std::string model;
  double hurst = 0.25;
  double alpha = 1.0;
  double beta = 1.0;
  double horizon = 1.0;
  std::size_t grid_n = 32;
  /// Explicit grid times (spacing = explicit); empty for uniform grids.
  std::vector<double> times;
  std::string functional;
  std::vector<std::string> functionals;
  std::vector<std::string> fields;
  std::size_t paths = 100000;
  std::uint64_t seed = 42;
  ExpectationMethod method;
  std::vector<std::size_t> grid_sweep;
  std::vector<double> hurst_sweep;
  std::size_t offsets = 6;
  std::size_t regression_offsets = 4;
  std::vector<double> s_points;
  std::string sampler;
  bool save_ensemble = false;
  std::size_t lemma_elements = 100;
  Json echo = Json::object();

  /// Validates names against the catalog and ranges (m >= 1000).
  static ExperimentConfig resolve(const Config& config, const std::string& scope);
  CovarianceModel covariance_model() const;
  CovarianceModel covariance_model(double hurst) const;
};

Report run_simulate(const ExperimentConfig& cfg, const RunOptions& options = {});
Report run_projection_lemma(const ExperimentConfig& cfg, const RunOptions& options = {});
Report run_adjointness(const ExperimentConfig& cfg, const RunOptions& options = {});
Report run_isometry_defect(const ExperimentConfig& cfg, const RunOptions& options = {});
Report run_factorization(const ExperimentConfig& cfg, const RunOptions& options = {});
Report run_remainder_scaling(const ExperimentConfig& cfg, const RunOptions& options = {});
Report run_gubinelli_compare(const ExperimentConfig& cfg, const RunOptions& options = {});
Report run_mixed(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Experiment names accepted by run_experiment (the config scopes).
const std::vector<std::string>& experiment_names();
std::string experiment_description(const std::string& name);

/// Runs the experiment registered under `name` with the config resolved for that scope.
Report run_experiment(const std::string& name, const Config& config, const RunOptions& options = {});

/// Every experiment listed in the `suite` key, in order.
std::vector<Report> run_suite(const Config& config, const RunOptions& options = {});

/// Summary report of a suite: one row and one check per member report.
Report summarize_suite(const std::vector<Report>& reports, const Config& config);

}  // namespace roughop
