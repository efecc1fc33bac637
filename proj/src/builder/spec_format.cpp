#include "dynnet/builder/spec_format.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "dynnet/core/error.hpp"

namespace dynnet::builder {

SpecValue SpecValue::make_integer(long long v) {
  SpecValue s;
  s.kind = Kind::integer;
  s.integer = v;
  return s;
}

SpecValue SpecValue::make_real(double v) {
  SpecValue s;
  s.kind = Kind::real;
  s.real = v;
  return s;
}

SpecValue SpecValue::make_boolean(bool v) {
  SpecValue s;
  s.kind = Kind::boolean;
  s.boolean = v;
  return s;
}

SpecValue SpecValue::make_dash() {
  SpecValue s;
  s.kind = Kind::dash;
  return s;
}

SpecValue SpecValue::make_list(std::vector<SpecValue> items) {
  SpecValue s;
  s.kind = Kind::list;
  s.items = std::move(items);
  return s;
}

SpecValue SpecValue::make_tuple(std::vector<SpecValue> items) {
  SpecValue s;
  s.kind = Kind::tuple;
  s.items = std::move(items);
  return s;
}

const SpecValue* SpecDocument::find(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

void SpecDocument::set(std::string key, SpecValue value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries.emplace_back(std::move(key), std::move(value));
}

namespace {

class ValueParser {
 public:
  ValueParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  SpecValue parse() {
    SpecValue v = value();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing text");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("spec line " + std::to_string(line_) + ": " + what + " near '" +
                      std::string(text_.substr(pos_)) + "'");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  SpecValue value() {
    skip_space();
    if (pos_ >= text_.size()) fail("missing value");
    const char c = text_[pos_];
    if (c == '[') return sequence(']', true);
    if (c == '(') return sequence(')', false);
    if (std::isalpha(static_cast<unsigned char>(c))) return word();
    if (c == '-' && (pos_ + 1 >= text_.size() ||
                     !(std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])) ||
                       text_[pos_ + 1] == '.'))) {
      ++pos_;
      return SpecValue::make_dash();
    }
    return number();
  }

  SpecValue sequence(char close, bool is_list) {
    ++pos_;
    std::vector<SpecValue> items;
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == close) {
      ++pos_;
      return is_list ? SpecValue::make_list({}) : SpecValue::make_tuple({});
    }
    while (true) {
      items.push_back(value());
      skip_space();
      if (pos_ >= text_.size()) fail(std::string("missing '") + close + "'");
      if (text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (text_[pos_] == close) {
        ++pos_;
        break;
      }
      fail("expected ',' or closing bracket");
    }
    return is_list ? SpecValue::make_list(std::move(items))
                   : SpecValue::make_tuple(std::move(items));
  }

  SpecValue word() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view w = text_.substr(start, pos_ - start);
    if (w == "True" || w == "true") return SpecValue::make_boolean(true);
    if (w == "False" || w == "false") return SpecValue::make_boolean(false);
    pos_ = start;
    fail("unknown word");
  }

  SpecValue number() {
    const std::size_t start = pos_;
    if (text_[pos_] == '-' || text_[pos_] == '+') ++pos_;
    bool is_real = false;
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '.' || c == 'e' || c == 'E' ||
                 ((c == '-' || c == '+') && (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E'))) {
        is_real = true;
        ++pos_;
      } else {
        break;
      }
    }
    std::string lexeme(text_.substr(start, pos_ - start));
    if (!lexeme.empty() && lexeme[0] == '+') lexeme.erase(0, 1);
    if (lexeme.empty() || lexeme == "-") {
      pos_ = start;
      fail("expected a number");
    }
    if (is_real) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), v);
      if (ec != std::errc() || p != lexeme.data() + lexeme.size()) {
        pos_ = start;
        fail("malformed real");
      }
      return SpecValue::make_real(v);
    }
    long long v = 0;
    auto [p, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), v);
    if (ec != std::errc() || p != lexeme.data() + lexeme.size()) {
      pos_ = start;
      fail("malformed integer");
    }
    return SpecValue::make_integer(v);
  }

  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

SpecDocument parse_spec_text(std::string_view text) {
  SpecDocument doc;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("spec line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError("spec line " + std::to_string(line_no) + ": empty key");
    if (doc.find(key)) {
      throw ConfigError("spec line " + std::to_string(line_no) + ": duplicate key " + key);
    }
    doc.entries.emplace_back(key, ValueParser(trim(line.substr(eq + 1)), line_no).parse());
  }
  return doc;
}

std::string format_value(const SpecValue& v) {
  switch (v.kind) {
    case SpecValue::Kind::integer: return std::to_string(v.integer);
    case SpecValue::Kind::real: {
      char buf[64];
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v.real);
      std::string s(buf, p);
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      return s;
    }
    case SpecValue::Kind::boolean: return v.boolean ? "True" : "False";
    case SpecValue::Kind::dash: return "-";
    case SpecValue::Kind::list:
    case SpecValue::Kind::tuple: {
      std::string s(1, v.kind == SpecValue::Kind::list ? '[' : '(');
      for (std::size_t i = 0; i < v.items.size(); ++i) {
        if (i) s += ", ";
        s += format_value(v.items[i]);
      }
      s += v.kind == SpecValue::Kind::list ? ']' : ')';
      return s;
    }
  }
  return {};
}

std::string format_spec(const SpecDocument& doc) {
  std::string out;
  for (const auto& [k, v] : doc.entries) {
    out += k;
    out += " = ";
    out += format_value(v);
    out += '\n';
  }
  return out;
}

}  // namespace dynnet::builder
