#pragma once

// Flat `key=value` text files used for trial metadata, dataset manifests,
// run configs and metric reports. Keys keep insertion order on write.

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace kdi {

class KeyValue {
 public:
  void set(const std::string& key, std::string value);
  void set(const std::string& key, double value);  // 17 significant digits
  void set_exact(const std::string& key, double value);  // hexfloat, bit-exact
  void set_exact(const std::string& key, std::span<const double> values);
  void set(const std::string& key, long long value);

  bool contains(const std::string& key) const;
  const std::string& get(const std::string& key) const;  // throws ValidationError if absent
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string to_string() const;
  static KeyValue parse(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static KeyValue load(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
};

std::string format_double(double value);  // %.17g
std::string format_exact(double value);   // %a
double parse_double(const std::string& text);
long long parse_int(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace kdi
