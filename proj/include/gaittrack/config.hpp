#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

namespace gait {

inline constexpr const char* kVersionString = "gaittrack 1.0.0";

// Flat key=value configuration ('#' comments, blank lines ignored). Reads are
// tracked so a run can reject keys it never consumed, which catches typos.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_text(const std::string& text, const std::string& context = "config");

  void set(const std::string& key, const std::string& value);
  // Applies a "key=value" override string (CLI --set).
  void set_pair(const std::string& pair);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  // Throws if any key was never read by one of the getters above.
  void reject_unused() const;

  // Sorted key=value block; identical configurations hash identically.
  std::string canonical_text() const;
  std::uint64_t hash() const;

 private:
  std::string context_ = "config";
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace gait
