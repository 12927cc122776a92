#include "roughop_cli/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "roughop/config.hpp"
#include "roughop/errors.hpp"
#include "roughop/experiments.hpp"
#include "roughop/functional.hpp"
#include "roughop/report.hpp"

namespace roughop::cli {

namespace {

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<double> hurst;
  std::optional<std::size_t> grid_n;
  std::optional<std::size_t> paths;
  std::string out;
  std::optional<std::size_t> workers;
};

struct Subcommand {
  const char* name;
  const char* scope;  // nullptr: not an experiment
  const char* help;
};

const std::vector<Subcommand>& subcommands() {
  static const std::vector<Subcommand> s{
      {"simulate", "simulate", "sample paths and cross-check the samplers"},
      {"adjointness", "adjointness", "E[F delta(u)] against E[<DF, u>]"},
      {"factorize", "factorize", "factorization residual under grid refinement"},
      {"remainder", "remainder", "controlled-expansion remainder scaling"},
      {"gubinelli", "gubinelli", "pairing slope against regression slope"},
      {"isometry", "isometry", "isometry defect against its closed form"},
      {"lemma", "lemma", "adapted projection against Gaussian regression"},
      {"mixed", "mixed", "mixed model alpha B + beta B^H"},
      {"verify-all", nullptr, "run every experiment of the suite"},
      {"list", nullptr, "list functionals and experiments"},
  };
  return s;
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Config build_config(const Options& o, const char* scope) {
  Config c = o.config.empty() ? Config::defaults() : Config::load(o.config);
  for (const std::string& kv : o.overrides) c.apply_override(kv);
  const std::string prefix = scope ? std::string(scope) + "." : std::string();
  if (o.seed) c.set("seed", std::to_string(*o.seed));
  if (o.hurst) {
    c.set(prefix + "hurst", number(*o.hurst));
    if (scope) c.set(prefix + "hurst_sweep", number(*o.hurst));
  }
  if (o.grid_n) {
    c.set(prefix + "grid_n", std::to_string(*o.grid_n));
    if (scope) c.set(prefix + "grid_sweep", std::to_string(*o.grid_n));
  }
  if (o.paths) c.set(prefix + "paths", std::to_string(*o.paths));
  return c;
}

std::filesystem::path output_dir(const Options& o) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("ROUGHOP_OUTPUT_DIR"); env && *env) return env;
  return "results";
}

void print_checks(const Report& r, std::ostream& out) {
  for (const Check& c : r.checks)
    out << "  " << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
}

int list(std::ostream& out) {
  out << "functionals:\n";
  for (const std::string& n : catalog_names()) out << "  " << n << "  " << catalog_description(n) << "\n";
  out << "experiments:\n";
  for (const std::string& n : experiment_names()) out << "  " << n << "  " << experiment_description(n) << "\n";
  out << "config keys:\n ";
  for (const std::string& k : Config::keys()) out << " " << k;
  out << "\n";
  return kOk;
}

int run(const Subcommand& sub, const Options& o, std::ostream& out, std::ostream& err) {
  Config config;
  std::vector<std::string> scopes;
  try {
    config = build_config(o, sub.scope);
    scopes = sub.scope ? std::vector<std::string>{sub.scope} : config.get_list("suite");
    for (const std::string& s : scopes) (void)ExperimentConfig::resolve(config, s);
  } catch (const Error& e) {
    err << "roughop: configuration error: " << e.what() << "\n";
    return kUsage;
  }

  const std::filesystem::path dir = output_dir(o);
  RunOptions options;
  options.workers = o.workers.value_or(0);
  options.ensemble_dir = dir;
  bool all_passed = true;
  try {
    std::vector<Report> reports;
    for (const std::string& s : scopes) {
      const auto start = std::chrono::steady_clock::now();
      Report r = run_experiment(s, config, options);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      const auto files = write_report(r, dir);
      out << (r.passed() ? "[pass] " : "[FAIL] ") << s << " (" << secs << " s) -> " << files.front().string() << "\n";
      print_checks(r, out);
      for (const std::string& w : r.warnings) err << "roughop: warning: " << w << "\n";
      all_passed = all_passed && r.passed();
      reports.push_back(std::move(r));
    }
    if (!sub.scope) {
      const Report summary = summarize_suite(reports, config);
      const auto files = write_report(summary, dir);
      out << (summary.passed() ? "[pass] " : "[FAIL] ") << "verify-all -> " << files.front().string() << "\n";
    }
  } catch (const ConfigError& e) {
    err << "roughop: configuration error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "roughop: output error: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    err << "roughop: numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "roughop: output error: " << e.what() << "\n";
    return kNumerical;
  }
  return all_passed ? kOk : kCriteriaFailed;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"roughop: operator calculus for rough fractional Brownian motion on finite grids"};
  app.name("roughop");
  app.require_subcommand(1);
  Options o;
  std::vector<std::pair<const Subcommand*, CLI::App*>> apps;
  for (const Subcommand& s : subcommands()) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    apps.emplace_back(&s, sub);
    if (std::string(s.name) == "list") continue;
    sub->add_option("--config", o.config, "key=value config file (defaults are built in)");
    sub->add_option("--set", o.overrides, "override a config key, key=value (repeatable)");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--hurst", o.hurst, "Hurst index");
    sub->add_option("--grid-n", o.grid_n, "grid size");
    sub->add_option("--paths", o.paths, "Monte Carlo path count");
    sub->add_option("--out", o.out, "output directory (default $ROUGHOP_OUTPUT_DIR or ./results)");
    sub->add_option("--workers", o.workers, "worker threads (default $ROUGHOP_WORKERS or all cores)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }
  for (const auto& [s, sub] : apps) {
    if (!sub->parsed()) continue;
    if (std::string(s->name) == "list") return list(out);
    return run(*s, o, out, err);
  }
  return kUsage;
}

}  // namespace roughop::cli
