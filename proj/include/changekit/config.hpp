#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace changekit {

/// Flat `key = value` configuration shared by corpus, run and endpoint files.
///
/// Lines starting with `#` are comments; blank lines are ignored. Keys are
/// stored in sorted order so `to_text()` is deterministic.
class KeyValueConfig {
public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  std::string to_text() const;

  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_or(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
  void erase(const std::string& key) { values_.erase(key); }

  /// Overlay: every key of `other` replaces the one here.
  void merge(const KeyValueConfig& other);

  const std::map<std::string, std::string>& entries() const noexcept { return values_; }

  bool operator==(const KeyValueConfig&) const = default;

private:
  std::map<std::string, std::string> values_;
};

} // namespace changekit
