#include "annlab/bench/config.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "annlab/errors.hpp"

namespace annlab::bench {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw InvalidArgument(fmt::format("config line {}: expected key=value", line_no));
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidArgument(fmt::format("config line {}: empty key", line_no));
    if (cfg.contains(std::string(key))) throw InvalidArgument(fmt::format("config line {}: duplicate key '{}'", line_no, key));
    cfg.set(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open config '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::header(std::string_view prefix) const {
  std::string out;
  for (const auto& [k, v] : values_) out += fmt::format("{}{}={}\n", prefix, k, v);
  return out;
}

}  // namespace annlab::bench
