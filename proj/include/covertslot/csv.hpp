/**
 * RFC 4180 CSV assembly: comma-separated cells, CRLF line ends, quoting only
 * when a cell contains a comma, quote, or line break.  Numbers are rendered
 * with %.12g so files are byte-stable across runs.
 */
#pragma once

#include <cstdio>
#include <initializer_list>
#include <string>
#include <vector>

namespace covertslot::csv {

inline std::string cell(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string cell(std::int64_t v) { return std::to_string(v); }
inline std::string cell(std::uint64_t v) { return std::to_string(v); }
inline std::string cell(bool v) { return v ? "1" : "0"; }
inline std::string cell(std::string s) { return s; }

inline std::string escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

class Writer {
 public:
  Writer() = default;

  explicit Writer(std::initializer_list<std::string> header) {
    append_row(std::vector<std::string>(header));
  }

  void append_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) body_ += ',';
      body_ += escape(cells[i]);
    }
    body_ += "\r\n";
  }

  template <typename... Ts>
  void row(Ts&&... vs) {
    append_row({cell(std::forward<Ts>(vs))...});
  }

  const std::string& str() const { return body_; }

 private:
  std::string body_;
};

}  // namespace covertslot::csv
