#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace relpatch {

/// Flat `key = value` config text, one pair per line, `#` starts a comment.
/// Typed getters mark keys as consumed; finish() rejects anything left over
/// so misspelled keys fail loudly instead of silently using defaults.
class KeyValueConfig {
public:
  KeyValueConfig() = default;
  static KeyValueConfig from_file(const std::string& path);
  static KeyValueConfig from_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback);
  std::int64_t get_int(const std::string& key, std::int64_t fallback);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);

  /// Throws listing every key that was never read.
  void finish() const;

private:
  const std::string* lookup(const std::string& key);

  std::string origin_;
  std::map<std::string, std::string> entries_;
  std::set<std::string> consumed_;
};

}  // namespace relpatch
