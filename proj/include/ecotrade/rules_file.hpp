#pragma once

// Rules file: one `key = value` per line, keys exactly the GameRules field
// names, `#` starts a comment. Missing keys keep their defaults.
//
//   width = 12
//   neighborhood = VonNeumann4
//   base_credit_range = 2,8

#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ecotrade/protocol.hpp"

namespace ecotrade {

namespace rules_detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class Int>
bool parse_int(std::string_view text, Int& out) {
  text = trim(text);
  if (text.empty()) return false;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

template <class T>
bool parse_value(std::string_view text, T& out) {
  if constexpr (std::is_same_v<T, ValueRange>) {
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) return false;
    return parse_int(text.substr(0, comma), out.min) && parse_int(text.substr(comma + 1), out.max);
  } else if constexpr (NamedEnum<T>) {
    auto parsed = parse_enum<T>(trim(text));
    if (!parsed) return false;
    out = *parsed;
    return true;
  } else {
    return parse_int(text, out);
  }
}

template <class T>
std::string format_value(const T& v) {
  if constexpr (std::is_same_v<T, ValueRange>) {
    return std::to_string(v.min) + "," + std::to_string(v.max);
  } else if constexpr (NamedEnum<T>) {
    return std::string(enum_name(v));
  } else {
    return std::to_string(v);
  }
}

template <class T>
std::string value_hint(const T&) {
  if constexpr (std::is_same_v<T, ValueRange>) {
    return "min,max";
  } else if constexpr (NamedEnum<T>) {
    std::string out;
    for (auto n : EnumNames<T>::names) {
      if (!out.empty()) out += '|';
      out += n;
    }
    return out;
  } else {
    return "integer";
  }
}

}  // namespace rules_detail

/// Field names in declaration order.
inline std::vector<std::string> rule_keys() {
  std::vector<std::string> keys;
  GameRules r;
  protocol::describe(r, [&](const char* key, auto&) { keys.emplace_back(key); });
  return keys;
}

inline GameRules parse_rules_text(std::string_view text) {
  GameRules rules;
  std::set<std::string, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = rules_detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::BadValue, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(rules_detail::trim(line.substr(0, eq)));
    const std::string_view value = rules_detail::trim(line.substr(eq + 1));
    bool known = false;
    protocol::describe(rules, [&](const char* name, auto& field) {
      if (key != name) return;
      known = true;
      if (!seen.insert(key).second) throw Error(ErrorCode::BadValue, key + " given twice", key);
      if (!rules_detail::parse_value(value, field)) {
        throw Error(ErrorCode::BadValue, key + ": cannot parse \"" + std::string(value) + "\"", key);
      }
    });
    if (!known) throw Error(ErrorCode::UnknownKey, key, key);
  }
  try {
    validate(rules);
  } catch (const Error& e) {
    throw Error(ErrorCode::BadValue, e.detail(), e.field());
  }
  return rules;
}

inline GameRules parse_rules_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Unreadable, path.string());
  std::ostringstream body;
  body << f.rdbuf();
  if (f.bad()) throw Error(ErrorCode::Unreadable, path.string());
  return parse_rules_text(body.str());
}

inline std::string write_rules_text(const GameRules& rules) {
  std::string out;
  protocol::describe(rules, [&](const char* key, const auto& field) {
    out += key;
    out += " = ";
    out += rules_detail::format_value(field);
    out += '\n';
  });
  return out;
}

/// One line per key with its accepted form and default, for --help.
inline std::string rules_help() {
  std::string out = "Rules file keys (key = value, one per line; missing keys use the default):\n";
  const GameRules defaults;
  protocol::describe(defaults, [&](const char* key, const auto& field) {
    std::string line = "  ";
    line += key;
    line.resize(22, ' ');
    line += "<" + rules_detail::value_hint(field) + ">";
    line.resize(50, ' ');
    line += "default: " + rules_detail::format_value(field) + "\n";
    out += line;
  });
  return out;
}

}  // namespace ecotrade
