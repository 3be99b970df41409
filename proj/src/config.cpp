#include "gaittrack/config.hpp"

#include <sstream>

#include "gaittrack/csv.hpp"
#include "gaittrack/errors.hpp"

namespace gait {

Config Config::from_file(const std::string& path) {
  return from_text(csv::read_file(path), path);
}

Config Config::from_text(const std::string& text, const std::string& context) {
  Config cfg;
  cfg.context_ = context;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos && eq > 0, ErrorCode::invalid_config,
            context + ":" + std::to_string(line_no) + ": expected key=value");
    cfg.values_[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

void Config::set_pair(const std::string& pair) {
  const auto eq = pair.find('=');
  require(eq != std::string::npos && eq > 0, ErrorCode::invalid_config,
          "override '" + pair + "': expected key=value");
  set(pair.substr(0, eq), pair.substr(eq + 1));
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return csv::parse_int(it->second, 0, context_ + " key " + key);
}

double Config::get_double(const std::string& key, double fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  return csv::parse_double(it->second, 0, context_ + " key " + key);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  fail(ErrorCode::invalid_config, context_ + " key " + key + ": expected true/false");
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    fail(ErrorCode::invalid_config, context_ + " key " + key + ": bad unsigned value");
  }
}

void Config::reject_unused() const {
  for (const auto& [key, value] : values_)
    require(used_.count(key) > 0, ErrorCode::invalid_config,
            context_ + ": unknown key '" + key + "'");
}

std::string Config::canonical_text() const {
  std::string out;
  for (const auto& [key, value] : values_) out += key + "=" + value + "\n";
  return out;
}

std::uint64_t Config::hash() const { return fnv1a64(canonical_text()); }

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace gait
