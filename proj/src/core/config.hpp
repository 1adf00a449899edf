#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gvpnn {

// "key = value" per line, '#' starts a comment, blank lines ignored.
// Duplicate and unknown keys are rejected.
class KvConfig {
 public:
  static KvConfig parse(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  // Inserts or overwrites (flag overrides).
  void set(const std::string& key, const std::string& value);

  void check_known(std::span<const std::string> allowed) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string render() const;

 private:
  const std::string* find(const std::string& key) const;
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_double(double x);  // shortest round-trip decimal, 17 digits max

std::vector<std::string> split_csv(const std::string& text);

}  // namespace gvpnn
