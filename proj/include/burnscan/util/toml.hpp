#pragma once

// Minimal TOML subset for run configuration: comments, [tables], and
// key = value lines with strings, integers, floats, booleans and flat
// arrays. Dotted access ("training.seed") addresses nested tables.

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "burnscan/util/error.hpp"

namespace burnscan::toml {

struct Value {
  enum class Kind { string, integer, floating, boolean, array };
  Kind kind = Kind::string;
  std::string str;
  long long integer = 0;
  double floating = 0.0;
  bool boolean = false;
  std::vector<Value> items;
};

class Table {
 public:
  bool has(const std::string& key) const { return values_.contains(key); }

  std::string get_string(const std::string& key, std::string fallback = "") const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::string) bad_type(key, "a string");
    return v->str;
  }

  long long get_int(const std::string& key, long long fallback = 0) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::integer) bad_type(key, "an integer");
    return v->integer;
  }

  double get_double(const std::string& key, double fallback = 0.0) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (v->kind == Value::Kind::integer) return double(v->integer);
    if (v->kind != Value::Kind::floating) bad_type(key, "a number");
    return v->floating;
  }

  bool get_bool(const std::string& key, bool fallback = false) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (v->kind != Value::Kind::boolean) bad_type(key, "a boolean");
    return v->boolean;
  }

  std::vector<long long> get_int_array(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return {};
    if (v->kind != Value::Kind::array) bad_type(key, "an array");
    std::vector<long long> out;
    for (const auto& item : v->items) {
      if (item.kind != Value::Kind::integer) bad_type(key, "an integer array");
      out.push_back(item.integer);
    }
    return out;
  }

  std::vector<std::string> get_string_array(const std::string& key) const {
    const Value* v = find(key);
    if (!v) return {};
    if (v->kind != Value::Kind::array) bad_type(key, "an array");
    std::vector<std::string> out;
    for (const auto& item : v->items) {
      if (item.kind != Value::Kind::string) bad_type(key, "a string array");
      out.push_back(item.str);
    }
    return out;
  }

  void set(const std::string& key, Value v) { values_[key] = std::move(v); }

  const std::map<std::string, Value>& entries() const { return values_; }

 private:
  const Value* find(const std::string& key) const {
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  [[noreturn]] static void bad_type(const std::string& key, const char* want) {
    throw Error(Errc::parse_error, "config key \"" + key + "\" is not " + want);
  }

  std::map<std::string, Value> values_;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(std::uint8_t(s[b]))) ++b;
  while (e > b && std::isspace(std::uint8_t(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Cuts a trailing comment, respecting quoted strings.
inline std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

[[noreturn]] inline void fail(const std::string& origin, int line_no,
                              const std::string& why) {
  throw Error(Errc::parse_error,
              origin + ":" + std::to_string(line_no) + ": " + why);
}

inline Value parse_scalar(const std::string& raw, const std::string& origin,
                          int line_no) {
  Value v;
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
    v.kind = Value::Kind::string;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      if (raw[i] == '\\') {
        if (i + 2 >= raw.size()) fail(origin, line_no, "dangling escape");
        const char c = raw[++i];
        if (c == 'n') v.str += '\n';
        else if (c == 't') v.str += '\t';
        else if (c == '"' || c == '\\') v.str += c;
        else fail(origin, line_no, std::string("unsupported escape \\") + c);
      } else {
        v.str += raw[i];
      }
    }
    return v;
  }
  if (raw == "true" || raw == "false") {
    v.kind = Value::Kind::boolean;
    v.boolean = raw == "true";
    return v;
  }
  if (raw.find_first_of(".eE") == std::string::npos) {
    long long n = 0;
    const auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), n);
    if (ec == std::errc() && p == raw.data() + raw.size()) {
      v.kind = Value::Kind::integer;
      v.integer = n;
      return v;
    }
  }
  try {
    std::size_t used = 0;
    const double d = std::stod(raw, &used);
    if (used == raw.size()) {
      v.kind = Value::Kind::floating;
      v.floating = d;
      return v;
    }
  } catch (const std::exception&) {
  }
  fail(origin, line_no, "cannot parse value \"" + raw + "\"");
}

inline Value parse_value(const std::string& raw, const std::string& origin,
                         int line_no) {
  if (!raw.empty() && raw.front() == '[') {
    if (raw.back() != ']') fail(origin, line_no, "unterminated array");
    Value arr;
    arr.kind = Value::Kind::array;
    std::string body = raw.substr(1, raw.size() - 2);
    std::string item;
    bool quoted = false;
    const auto flush = [&] {
      const std::string t = trim(item);
      if (!t.empty()) arr.items.push_back(parse_scalar(t, origin, line_no));
      item.clear();
    };
    for (char c : body) {
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) flush();
      else item += c;
    }
    flush();
    return arr;
  }
  return parse_scalar(raw, origin, line_no);
}

}  // namespace detail

inline Table parse(const std::string& text, const std::string& origin = "config") {
  Table table;
  std::string prefix;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    line = detail::trim(detail::strip_comment(line));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        detail::fail(origin, line_no, "malformed table header");
      prefix = detail::trim(line.substr(1, line.size() - 2)) + ".";
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      detail::fail(origin, line_no, "expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string raw = detail::trim(line.substr(eq + 1));
    if (key.empty()) detail::fail(origin, line_no, "empty key");
    if (raw.empty()) detail::fail(origin, line_no, "empty value");
    const std::string full = prefix + key;
    if (table.has(full))
      detail::fail(origin, line_no, "duplicate key \"" + full + "\"");
    table.set(full, detail::parse_value(raw, origin, line_no));
  }
  return table;
}

inline Table parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::read_failure, "cannot open " + path);
  const std::string text(std::istreambuf_iterator<char>(in),
                         std::istreambuf_iterator<char>{});
  return parse(text, path);
}

}  // namespace burnscan::toml
