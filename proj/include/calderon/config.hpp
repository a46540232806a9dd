#pragma once

#include "calderon/types.hpp"

#include <map>
#include <string>

namespace calderon {

/// Flat key=value configuration with INI-style section headers.
///
///   # comment
///   [descent]
///   alpha = 0.5
///
/// stores "descent.alpha" -> "0.5". Keys before any [section] are bare.
/// Lookups are typed; a malformed value names the key in the error.
/// Later set() calls (command-line overrides) win over file content.
class Config {
public:
  Config() = default;

  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<config>");

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  Real get_real(const std::string& key, Real fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated reals, e.g. "0.5,0.5,0.05".
  Vector get_vector(const std::string& key, const Vector& fallback) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

private:
  std::map<std::string, std::string> entries_;
};

}  // namespace calderon
