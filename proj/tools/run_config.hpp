#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"

namespace oamp::cli {

/// Flat dotted-key configuration ("guidance.rho": 0.8, ...). Every key has a
/// default; files and overrides may only set known keys, with the default's
/// type.
class RunConfig {
 public:
  RunConfig();

  /// Merges a JSON object from disk. Throws ConfigError on unknown keys,
  /// nested objects or type mismatches.
  void merge_file(const std::filesystem::path& path);
  void set(const std::string& key, nlohmann::json value);

  int integer(const std::string& key) const;
  double number(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::uint64_t seed() const;

  /// Effective configuration as one flat object; loading it back with
  /// merge_file reproduces this config.
  nlohmann::json to_json() const;
  void write_lock(const std::filesystem::path& dir) const;

 private:
  const nlohmann::json& at(const std::string& key) const;

  std::map<std::string, nlohmann::json> values_;
};

}  // namespace oamp::cli
