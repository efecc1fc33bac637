#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dynnet::builder {

/// Value tree of the flat `key = value` model description. Tuples and
/// lists are kept apart so a document re-emits with its original brackets.
struct SpecValue {
  enum class Kind { integer, real, boolean, dash, list, tuple };

  Kind kind = Kind::integer;
  long long integer = 0;
  double real = 0.0;
  bool boolean = false;
  std::vector<SpecValue> items;

  static SpecValue make_integer(long long v);
  static SpecValue make_real(double v);
  static SpecValue make_boolean(bool v);
  static SpecValue make_dash();
  static SpecValue make_list(std::vector<SpecValue> items);
  static SpecValue make_tuple(std::vector<SpecValue> items);

  bool is_sequence() const { return kind == Kind::list || kind == Kind::tuple; }
  bool is_number() const { return kind == Kind::integer || kind == Kind::real; }
  double as_number() const { return kind == Kind::integer ? static_cast<double>(integer) : real; }
};

struct SpecDocument {
  std::vector<std::pair<std::string, SpecValue>> entries;

  const SpecValue* find(std::string_view key) const;
  void set(std::string key, SpecValue value);
};

/// Parses one `key = value` per line. Blank lines and lines starting with
/// '#' are skipped. Throws ConfigError with the line number on bad syntax or
/// a duplicated key.
SpecDocument parse_spec_text(std::string_view text);

/// Canonical text: `key = value` lines in document order, ", " between
/// items, True/False for booleans and '-' for the absent marker.
std::string format_spec(const SpecDocument& doc);

std::string format_value(const SpecValue& value);

}  // namespace dynnet::builder
