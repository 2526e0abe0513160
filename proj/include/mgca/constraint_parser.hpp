#pragma once

// Text grammar for user constraints and objectives:
//
//   constraint := expr REL number        REL in {<=, >=, =}
//   expr       := [+|-] term { (+|-) term }
//   term       := [number '*'] name      name matches [A-Za-z0-9_.]+
//
// Example: `2*wind+solar<=500`. Repeated names accumulate.

#include <cctype>
#include <cmath>
#include <charconv>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "mgca/error.hpp"
#include "mgca/lp.hpp"

namespace mgca {

struct LinearConstraintSpec {
  std::map<std::string, double> terms;
  lp::Relation relation = lp::Relation::less_equal;
  double rhs = 0.0;
  std::string label;
};

struct ObjectiveSpec {
  std::map<std::string, double> terms;
  lp::Sense sense = lp::Sense::minimize;
};

namespace detail {

class ExpressionParser {
public:
  explicit ExpressionParser(std::string_view text) : text_(text) {}

  std::map<std::string, double> expression() {
    std::map<std::string, double> terms;
    skip_space();
    double sign = 1.0;
    if (peek() == '+' || peek() == '-') {
      sign = peek() == '-' ? -1.0 : 1.0;
      ++pos_;
    }
    while (true) {
      auto [name, coef] = term();
      terms[name] += sign * coef;
      skip_space();
      if (peek() == '+' || peek() == '-') {
        sign = peek() == '-' ? -1.0 : 1.0;
        ++pos_;
        continue;
      }
      break;
    }
    return terms;
  }

  lp::Relation relation() {
    skip_space();
    if (text_.substr(pos_, 2) == "<=") {
      pos_ += 2;
      return lp::Relation::less_equal;
    }
    if (text_.substr(pos_, 2) == ">=") {
      pos_ += 2;
      return lp::Relation::greater_equal;
    }
    if (peek() == '=') {
      ++pos_;
      if (peek() == '=') ++pos_;
      return lp::Relation::equal;
    }
    fail("expected '<=', '>=' or '='");
  }

  double signed_number() {
    skip_space();
    double sign = 1.0;
    if (peek() == '+' || peek() == '-') {
      sign = peek() == '-' ? -1.0 : 1.0;
      ++pos_;
      skip_space();
    }
    auto value = number();
    if (!value) fail("expected a number");
    return sign * *value;
  }

  void expect_end() {
    skip_space();
    if (pos_ < text_.size()) fail("unexpected trailing input");
  }

  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, std::string(text_), pos_);
  }

private:
  static bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::optional<double> number() {
    double value = 0.0;
    const char* begin = text_.data() + pos_;
    auto [ptr, ec] = std::from_chars(begin, text_.data() + text_.size(), value);
    if (ec != std::errc{} || ptr == begin || !std::isfinite(value)) return std::nullopt;
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  std::pair<std::string, double> term() {
    skip_space();
    const std::size_t start = pos_;
    double coef = 1.0;
    if (auto value = number()) {
      skip_space();
      if (peek() == '*') {
        ++pos_;
        coef = *value;
        skip_space();
      } else {
        pos_ = start;  // a name that starts with digits, e.g. `2030_build`
      }
    }
    const std::size_t name_start = pos_;
    while (pos_ < text_.size() && is_name_char(text_[pos_])) ++pos_;
    if (pos_ == name_start) fail("expected a dimension name");
    return {std::string(text_.substr(name_start, pos_ - name_start)), coef};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline LinearConstraintSpec parse_constraint(std::string_view text) {
  detail::ExpressionParser p(text);
  LinearConstraintSpec spec;
  spec.terms = p.expression();
  spec.relation = p.relation();
  spec.rhs = p.signed_number();
  p.expect_end();
  spec.label = std::string(text);
  return spec;
}

/// Parses a bare linear expression such as `system_cost` or `wind-0.5*solar`.
inline std::map<std::string, double> parse_expression(std::string_view text) {
  detail::ExpressionParser p(text);
  auto terms = p.expression();
  p.expect_end();
  return terms;
}

inline std::string format_constraint(const LinearConstraintSpec& c) {
  std::string out;
  for (const auto& [name, coef] : c.terms) {
    if (!out.empty() || coef < 0) out += coef < 0 ? "-" : "+";
    const double mag = std::abs(coef);
    if (mag != 1.0) out += format_double(mag) + "*";
    out += name;
  }
  return out + lp::to_string(c.relation) + format_double(c.rhs);
}

}  // namespace mgca
