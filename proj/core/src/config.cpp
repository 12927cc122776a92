#include "roughop/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "default_config.hpp"
#include "roughop/errors.hpp"

namespace roughop {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string scoped(std::string_view scope, const std::string& key) {
  return std::string(scope) + "." + key;
}

}  // namespace

const std::vector<std::string>& Config::keys() {
  static const std::vector<std::string> k{
      "alpha",     "beta",       "fields",       "functional",   "functionals", "grid_n",
      "grid_sweep", "horizon",   "hurst",        "hurst_sweep",  "lemma_elements", "mc_samples",
      "method",    "model",      "offsets",      "paths",        "quad_nodes",  "regression_offsets",
      "s_points",  "sampler",    "save_ensemble", "seed",        "spacing",     "suite",
      "times"};
  return k;
}

const std::vector<std::string>& Config::scopes() {
  static const std::vector<std::string> s{"simulate",        "lemma",     "adjointness", "isometry", "factorize",
                                          "factorize_exact", "remainder", "gubinelli",   "mixed"};
  return s;
}

std::string Config::default_text() { return detail::kDefaultConfig; }

Config Config::defaults() {
  Config c;
  std::istringstream in(detail::kDefaultConfig);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("built-in config line " + std::to_string(number) + " malformed");
    c.values_[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
  }
  return c;
}

Config Config::parse(std::string_view text, std::string_view origin) {
  Config c = defaults();
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError(std::string(origin) + ":" + std::to_string(number) + ": expected key = value");
    try {
      c.set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

void Config::set(const std::string& key, const std::string& value) {
  std::string base = key;
  const auto dot = key.find('.');
  if (dot != std::string::npos) {
    const std::string scope = key.substr(0, dot);
    base = key.substr(dot + 1);
    const auto& s = scopes();
    if (std::find(s.begin(), s.end(), scope) == s.end()) throw ConfigError("unknown experiment scope '" + scope + "'");
  }
  const auto& k = keys();
  if (std::find(k.begin(), k.end(), base) == k.end()) throw ConfigError("unknown config key '" + key + "'");
  if (value.empty()) throw ConfigError("empty value for '" + key + "'");
  values_[key] = value;
}

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "' is not key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::string Config::get(const std::string& key, std::string_view scope) const {
  if (!scope.empty()) {
    auto it = values_.find(scoped(scope, key));
    if (it != values_.end()) return it->second;
  }
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key, std::string_view scope) const {
  const std::string v = get(key, scope);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  return out;
}

std::uint64_t Config::get_u64(const std::string& key, std::string_view scope) const {
  const std::string v = get(key, scope);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

std::size_t Config::get_size(const std::string& key, std::string_view scope) const {
  return static_cast<std::size_t>(get_u64(key, scope));
}

bool Config::get_bool(const std::string& key, std::string_view scope) const {
  const std::string v = get(key, scope);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> Config::get_list(const std::string& key, std::string_view scope) const {
  std::vector<std::string> out;
  std::istringstream in(get(key, scope));
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError("'" + key + "' has an empty list item");
    out.push_back(item);
  }
  return out;
}

std::vector<double> Config::get_doubles(const std::string& key, std::string_view scope) const {
  std::vector<double> out;
  for (const std::string& item : get_list(key, scope)) {
    double v = 0.0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw ConfigError("'" + key + "' expects numbers, got '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::size_t> Config::get_sizes(const std::string& key, std::string_view scope) const {
  std::vector<std::size_t> out;
  for (const std::string& item : get_list(key, scope)) {
    std::size_t v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (res.ec != std::errc() || res.ptr != item.data() + item.size())
      throw ConfigError("'" + key + "' expects non-negative integers, got '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> Config::resolved(std::string_view scope) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const std::string& k : keys()) {
    const bool present = values_.count(k) != 0 || (!scope.empty() && values_.count(scoped(scope, k)) != 0);
    if (present) out.emplace_back(k, get(k, scope));
  }
  return out;
}

}  // namespace roughop
