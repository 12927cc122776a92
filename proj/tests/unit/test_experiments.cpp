#include <cmath>

#include <gtest/gtest.h>

#include "roughop/errors.hpp"
#include "roughop/experiments.hpp"

using namespace roughop;

namespace {

Config small_config() {
  Config c = Config::defaults();
  c.apply_override("paths=2000");
  c.apply_override("grid_n=16");
  c.apply_override("grid_sweep=8,16");
  c.apply_override("simulate.grid_n=16");
  c.apply_override("remainder.grid_n=128");
  c.apply_override("gubinelli.grid_n=32");
  c.apply_override("factorize_exact.grid_sweep=8,16");
  c.apply_override("lemma_elements=10");
  return c;
}

const Check& require_check(const Report& r, const std::string& name) {
  const Check* c = r.find_check(name);
  if (c == nullptr) throw std::runtime_error("missing check " + name);
  return *c;
}

}  // namespace

TEST(Experiments, ResolveValidatesInputs) {
  Config c = small_config();
  EXPECT_NO_THROW(ExperimentConfig::resolve(c, "adjointness"));
  c.apply_override("paths=10");
  EXPECT_THROW(ExperimentConfig::resolve(c, "adjointness"), ConfigError);
  Config d = small_config();
  d.apply_override("functional=unknown");
  EXPECT_THROW(ExperimentConfig::resolve(d, "factorize"), ConfigError);
  Config e = small_config();
  e.apply_override("spacing=explicit");
  e.apply_override("times=0.2,0.5,1");
  const auto cfg = ExperimentConfig::resolve(e, "adjointness");
  EXPECT_EQ(cfg.grid_n, 3u);
  EXPECT_EQ(cfg.grid_sweep, (std::vector<std::size_t>{3}));
}

TEST(Experiments, LemmaIsExactLinearAlgebra) {
  const auto r = run_experiment("lemma", small_config());
  EXPECT_TRUE(r.passed());
  EXPECT_TRUE(require_check(r, "brownian_projection").passed);
  EXPECT_TRUE(require_check(r, "projection_matches_regression_H0.1").passed);
}

TEST(Experiments, ExactBrownianFactorization) {
  const auto r = run_experiment("factorize_exact", small_config());
  EXPECT_TRUE(require_check(r, "exact_residual_N8").passed);
  EXPECT_TRUE(require_check(r, "exact_residual_N16").passed);
  EXPECT_EQ(r.table.columns, (std::vector<std::string>{"grid_n", "residual", "se", "jitter"}));
  EXPECT_EQ(r.table.rows.size(), 2u);
}

TEST(Experiments, IsometryTerminalSquareIdentityIsExact) {
  const auto r = run_experiment("isometry", small_config());
  EXPECT_TRUE(require_check(r, "terminal_square_identity").passed);
}

TEST(Experiments, RemainderNeedsFiveOffsets) {
  Config c = small_config();
  c.apply_override("offsets=3");
  EXPECT_THROW(run_experiment("remainder", c), ConfigError);
  const auto r = run_experiment("remainder", small_config());
  EXPECT_TRUE(require_check(r, "increment_norm_identity").passed);
  EXPECT_EQ(r.table.rows.size(), 6u);
}

TEST(Experiments, DeterministicAcrossWorkerCounts) {
  const Config c = small_config();
  for (const std::string name : {"simulate", "adjointness", "factorize", "mixed"}) {
    const auto a = run_experiment(name, c, RunOptions{1, {}});
    const auto b = run_experiment(name, c, RunOptions{3, {}});
    EXPECT_EQ(dump_json(to_json(a)), dump_json(to_json(b))) << name;
    EXPECT_EQ(to_csv(a.table), to_csv(b.table)) << name;
  }
}

TEST(Experiments, SeedChangeKeepsSchema) {
  Config c = small_config();
  const auto a = run_experiment("adjointness", c);
  c.apply_override("seed=43");
  const auto b = run_experiment("adjointness", c);
  EXPECT_EQ(a.table.columns, b.table.columns);
  EXPECT_EQ(a.table.rows.size(), b.table.rows.size());
  EXPECT_EQ(a.checks.size(), b.checks.size());
  EXPECT_NE(to_csv(a.table), to_csv(b.table));
}

TEST(Experiments, ConfigEchoReflectsOverrides) {
  Config c = small_config();
  c.apply_override("seed=99");
  const auto r = run_experiment("lemma", c);
  EXPECT_EQ(r.seed, 99u);
  EXPECT_EQ(to_json(r)["config"]["seed"], "99");
}

TEST(Experiments, SuiteSummaryHasOneCheckPerMember) {
  Config c = small_config();
  c.apply_override("suite=lemma,factorize_exact");
  const auto reports = run_suite(c);
  ASSERT_EQ(reports.size(), 2u);
  const auto summary = summarize_suite(reports, c);
  EXPECT_EQ(summary.checks.size(), 2u);
  EXPECT_TRUE(summary.passed());
  EXPECT_THROW(run_experiment("unknown", c), ConfigError);
}
