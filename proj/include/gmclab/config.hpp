#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace gmclab {

// Flat key = value configuration. '#' starts a comment, blank lines are
// ignored, lists are comma separated. Values are kept as written so a config
// round-trips through to_text() unchanged. Typed getters record which keys
// were read; require_all_used() rejects any key nobody asked for.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<config>");
  static Config load(const std::filesystem::path& path);

  std::string to_text() const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  void erase(const std::string& key);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<std::int64_t> get_int_list(const std::string& key, const std::vector<std::int64_t>& fallback) const;
  std::vector<std::string> get_string_list(const std::string& key, const std::vector<std::string>& fallback) const;

  // Throws ConfigError naming every key that no getter has read.
  void require_all_used() const;

  bool operator==(const Config& other) const { return entries_ == other.entries_; }

 private:
  const std::string* find(const std::string& key) const;
  std::string source_;
  std::vector<std::pair<std::string, std::string>> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace gmclab
