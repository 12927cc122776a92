#pragma once

// Plain key=value experiment configuration.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace roughop {

class Config {
 public:
  /// The built-in configuration (identical to configs/default.cfg).
  static Config defaults();
  /// Built-in defaults overridden by the lines of `text`.
  static Config parse(std::string_view text, std::string_view origin = "<text>");
  static Config load(const std::filesystem::path& path);

  static const std::vector<std::string>& keys();
  static const std::vector<std::string>& scopes();
  static std::string default_text();

  /// Unknown keys or scopes raise ConfigError.
  void set(const std::string& key, const std::string& value);
  /// "key=value".
  void apply_override(std::string_view assignment);
  bool contains(const std::string& key) const { return values_.count(key) != 0; }

  /// `<scope>.<key>` if present, else `<key>`.
  std::string get(const std::string& key, std::string_view scope = {}) const;
  double get_double(const std::string& key, std::string_view scope = {}) const;
  std::size_t get_size(const std::string& key, std::string_view scope = {}) const;
  std::uint64_t get_u64(const std::string& key, std::string_view scope = {}) const;
  bool get_bool(const std::string& key, std::string_view scope = {}) const;
  std::vector<std::string> get_list(const std::string& key, std::string_view scope = {}) const;
  std::vector<double> get_doubles(const std::string& key, std::string_view scope = {}) const;
  std::vector<std::size_t> get_sizes(const std::string& key, std::string_view scope = {}) const;

  /// Every key resolved for `scope`, in key order.
  std::vector<std::pair<std::string, std::string>> resolved(std::string_view scope) const;
  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace roughop
