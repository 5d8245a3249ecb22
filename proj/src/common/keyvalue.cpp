#include "kdi/keyvalue.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kdi/error.hpp"

namespace kdi {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_exact(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", value);
  return buf;
}

double parse_double(const std::string& text) {
  if (text.empty()) throw ValidationError("empty numeric field");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw ValidationError("not a number: '" + text + "'");
  }
  return v;
}

long long parse_int(const std::string& text) {
  if (text.empty()) throw ValidationError("empty integer field");
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || errno == ERANGE) {
    throw ValidationError("not an integer: '" + text + "'");
  }
  return v;
}

void KeyValue::set(const std::string& key, std::string value) {
  if (auto it = index_.find(key); it != index_.end()) {
    entries_[it->second].second = std::move(value);
    return;
  }
  index_.emplace(key, entries_.size());
  entries_.emplace_back(key, std::move(value));
}

void KeyValue::set(const std::string& key, double value) { set(key, format_double(value)); }

void KeyValue::set_exact(const std::string& key, double value) { set(key, format_exact(value)); }

void KeyValue::set_exact(const std::string& key, std::span<const double> values) {
  std::string joined;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) joined += ',';
    joined += format_exact(values[i]);
  }
  set(key, std::move(joined));
}

void KeyValue::set(const std::string& key, long long value) { set(key, std::to_string(value)); }

bool KeyValue::contains(const std::string& key) const { return index_.count(key) != 0; }

const std::string& KeyValue::get(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) throw ValidationError("missing key '" + key + "'");
  return entries_[it->second].second;
}

std::string KeyValue::get_or(const std::string& key, const std::string& fallback) const {
  auto it = index_.find(key);
  return it == index_.end() ? fallback : entries_[it->second].second;
}

double KeyValue::get_double(const std::string& key) const { return parse_double(get(key)); }

long long KeyValue::get_int(const std::string& key) const { return parse_int(get(key)); }

std::vector<double> KeyValue::get_doubles(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item));
  return out;
}

std::string KeyValue::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

KeyValue KeyValue::parse(const std::string& text) {
  KeyValue kv;
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ValidationError("line " + std::to_string(lineno) + ": expected key=value");
    }
    kv.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

void KeyValue::save(const std::filesystem::path& path) const { write_text_file(path, to_string()); }

KeyValue KeyValue::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace kdi
