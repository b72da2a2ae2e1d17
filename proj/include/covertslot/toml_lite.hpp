/**
 * Parser for the TOML subset used by the experiment manifests: [section]
 * headers, key = value pairs, # comments, and values that are strings,
 * numbers, booleans, or single-line arrays of numbers.  Keys are flattened
 * to "section.key".
 */
#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "covertslot/errors.hpp"

namespace covertslot::toml {

struct Value {
  enum class Kind { String, Number, Boolean, NumberList };
  Kind kind = Kind::String;
  std::string text;
  double number = 0.0;
  bool boolean = false;
  std::vector<double> list;
};

using Table = std::map<std::string, Value>;

/** Throws ConfigError with a line reference on malformed input. */
Table parse(std::string_view text);

}  // namespace covertslot::toml
