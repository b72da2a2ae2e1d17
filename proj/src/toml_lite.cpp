#include "covertslot/toml_lite.hpp"

#include <cctype>
#include <cstdlib>

namespace covertslot::toml {

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw ConfigError("line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view token, int line) {
  std::string t(strip(token));
  if (t.empty()) fail(line, "empty number");
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) fail(line, "malformed number '" + t + "'");
  return v;
}

Value parse_value(std::string_view token, int line) {
  token = strip(token);
  if (token.empty()) fail(line, "missing value");
  Value v;
  if (token.front() == '"') {
    if (token.size() < 2 || token.back() != '"')
      fail(line, "unterminated string");
    v.kind = Value::Kind::String;
    v.text = std::string(token.substr(1, token.size() - 2));
    return v;
  }
  if (token == "true" || token == "false") {
    v.kind = Value::Kind::Boolean;
    v.boolean = token == "true";
    return v;
  }
  if (token.front() == '[') {
    if (token.back() != ']') fail(line, "unterminated array");
    v.kind = Value::Kind::NumberList;
    std::string_view inner = strip(token.substr(1, token.size() - 2));
    while (!inner.empty()) {
      std::size_t comma = inner.find(',');
      std::string_view elem =
          comma == std::string_view::npos ? inner : inner.substr(0, comma);
      v.list.push_back(parse_number(elem, line));
      if (comma == std::string_view::npos) break;
      inner = inner.substr(comma + 1);
      if (strip(inner).empty()) fail(line, "trailing comma in array");
    }
    return v;
  }
  v.kind = Value::Kind::Number;
  v.number = parse_number(token, line);
  v.text = std::string(token);
  return v;
}

/** Removes a trailing comment, respecting quoted strings. */
std::string_view strip_comment(std::string_view s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-')
      return false;
  return true;
}

}  // namespace

Table parse(std::string_view text) {
  Table table;
  std::string section;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    std::size_t nl = text.find('\n');
    std::string_view line =
        nl == std::string_view::npos ? text : text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    line = strip(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      std::string_view name = strip(line.substr(1, line.size() - 2));
      if (!valid_key(name)) fail(line_no, "malformed section name");
      section = std::string(name);
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected key = value");
    std::string_view key = strip(line.substr(0, eq));
    if (!valid_key(key)) fail(line_no, "malformed key");
    std::string full = section.empty()
                           ? std::string(key)
                           : section + "." + std::string(key);
    if (table.count(full)) fail(line_no, "duplicate key '" + full + "'");
    table[full] = parse_value(line.substr(eq + 1), line_no);
  }
  return table;
}

}  // namespace covertslot::toml
