#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace hdi {

/// Shortest decimal text that parses back to exactly `value`. Locale independent.
std::string format_shortest(double value);

/// Fixed notation with `precision` digits after the point. Locale independent.
std::string format_fixed(double value, int precision);

/// Strict decimal parse: the whole string must be a finite number in plain or
/// exponent notation. "nan", "inf", leading '+', and embedded spaces are rejected.
std::optional<double> parse_decimal(std::string_view text);

std::optional<long long> parse_integer(std::string_view text);

/// Strips leading and trailing ASCII whitespace.
std::string_view trim(std::string_view text);

}  // namespace hdi
