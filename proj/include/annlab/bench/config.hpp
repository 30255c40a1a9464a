#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace annlab::bench {

/// Plain-text key=value parameters. Blank lines and lines starting with '#'
/// are ignored; whitespace around keys and values is trimmed.
class Config {
 public:
  Config() = default;

  static Config parse(std::string_view text);
  static Config load(const std::string& path);

  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  bool contains(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const noexcept { return values_; }

  /// "# key=value" lines in key order, used as report headers.
  std::string header(std::string_view prefix = "# ") const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace annlab::bench
