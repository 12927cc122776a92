#pragma once

// Experiment reports: one JSON document plus one CSV table per run.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace roughop {

inline constexpr const char* kSpecVersion = "1.0";

using Json = nlohmann::ordered_json;
using Cell = std::variant<double, std::int64_t, std::string, bool>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  void add(std::vector<Cell> row);
};

/// A pass/fail assertion carried by a report.
struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Report {
  std::string experiment;
  std::string model;
  double hurst = 0.5;
  std::size_t grid_n = 0;
  std::uint64_t seed = 0;
  Json config = Json::object();
  Json results = Json::array();
  Json provenance = Json::object();
  Table table;
  std::vector<Check> checks;
  std::vector<std::string> warnings;

  bool passed() const;
  void check(std::string name, bool passed, std::string detail = {});
  const Check* find_check(const std::string& name) const;
};

/// "{experiment}_{model}_{H}_{N}_{seed}".
std::string report_stem(const Report& report);
Json to_json(const Report& report);
/// JSON text with every double written as %.17g and a trailing newline.
std::string dump_json(const Json& value);
std::string to_csv(const Table& table);

/// Writes <stem>.json and <stem>.csv; throws IoError when the directory is unusable.
std::vector<std::filesystem::path> write_report(const Report& report, const std::filesystem::path& dir);

/// %.17g.
std::string format_double(double value);

}  // namespace roughop
