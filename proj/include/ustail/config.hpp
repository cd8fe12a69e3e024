#pragma once

// Flat experiment configuration: "section.key = value" lines, '#' comments.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <vector>

namespace ustail {

struct ConfigKey {
  std::string name;
  std::string help;
};

/// Every key the pipeline understands.
const std::vector<ConfigKey>& config_keys();

class Config {
 public:
  static Config parse(std::istream& in, const std::string& source);
  static Config load(const std::filesystem::path& path);

  /// Sets or overrides a key; origin names where the value came from.
  void set(const std::string& key, const std::string& value, const std::string& origin);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::string get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// "log:lo:hi:count", "lin:lo:hi:count" or a comma-separated list.
  std::vector<double> get_grid(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_list(const std::string& key, const std::string& fallback) const;

  /// Location of a key's value ("file:line" or "--key") for error messages.
  std::string origin(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Canonical text form: sorted key = value lines.
  std::string canonical() const;

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> origins_;
};

std::vector<double> parse_grid(const std::string& spec, const std::string& context);

}  // namespace ustail
