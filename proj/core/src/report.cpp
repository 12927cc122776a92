#include "roughop/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "roughop/errors.hpp"

namespace roughop {

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw DimensionError("table row width differs from column count");
  rows.push_back(std::move(row));
}

bool Report::passed() const {
  for (const Check& c : checks)
    if (!c.passed) return false;
  return true;
}

void Report::check(std::string name, bool ok, std::string detail) {
  checks.push_back({std::move(name), ok, std::move(detail)});
}

const Check* Report::find_check(const std::string& name) const {
  for (const Check& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string report_stem(const Report& report) {
  char h[32];
  std::snprintf(h, sizeof h, "%g", report.hurst);
  return report.experiment + "_" + report.model + "_" + h + "_" + std::to_string(report.grid_n) + "_" +
         std::to_string(report.seed);
}

Json to_json(const Report& report) {
  Json j = Json::object();
  j["spec_version"] = kSpecVersion;
  j["experiment"] = report.experiment;
  j["model"] = report.model;
  j["hurst"] = report.hurst;
  j["grid_n"] = report.grid_n;
  j["seed"] = report.seed;
  j["passed"] = report.passed();
  j["config"] = report.config;
  j["results"] = report.results;
  Json checks = Json::array();
  for (const Check& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = checks;
  j["warnings"] = report.warnings;
  j["provenance"] = report.provenance;
  return j;
}

namespace {

void emit(const Json& v, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + Json(it.key()).dump() + ": ";
        emit(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      bool first = true;
      for (const auto& e : v) {
        if (!first) out += ",\n";
        first = false;
        out += inner;
        emit(e, out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      // JSON has no NaN or infinity; they are written as strings.
      out += std::isfinite(d) ? format_double(d) : "\"" + format_double(d) + "\"";
      return;
    }
    default:
      out += v.dump();
  }
}

std::string csv_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  const std::string& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

}  // namespace

std::string dump_json(const Json& value) {
  std::string out;
  emit(value, out, 0);
  out += "\n";
  return out;
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) out += (c ? "," : "") + csv_cell(table.columns[c]);
  out += "\n";
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + csv_cell(row[c]);
    out += "\n";
  }
  return out;
}

std::vector<std::filesystem::path> write_report(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError("cannot create output directory '" + dir.string() + "'");
  const std::string stem = report_stem(report);
  const std::vector<std::pair<std::filesystem::path, std::string>> files{
      {dir / (stem + ".json"), dump_json(to_json(report))}, {dir / (stem + ".csv"), to_csv(report.table)}};
  std::vector<std::filesystem::path> written;
  for (const auto& [path, text] : files) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw IoError("write failed for '" + path.string() + "'");
    written.push_back(path);
  }
  return written;
}

}  // namespace roughop
