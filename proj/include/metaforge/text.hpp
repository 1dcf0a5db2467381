#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace metaforge {

// UTF-8 helpers. Malformed sequences decode to U+FFFD.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);
std::size_t utf8_length(std::string_view text);
std::wstring to_wide(std::string_view text);

/// Simple Unicode default case folding, applied code point by code point.
std::string casefold(std::string_view text);

/// Strips leading and trailing Unicode white space.
std::string trim(std::string_view text);

/// Match key for literal text: trimmed, then casefolded.
std::string normalize_text_key(std::string_view text);

/// Casefolded runs of letters and digits, in order of appearance.
std::vector<std::string> tokenize(std::string_view text);

/// Shortest decimal text (no exponent) that round-trips to `value`.
/// Negative zero is written as "0".
std::string canonical_decimal(double value);

/// Exact decimal number used for bound checks, so that comparisons follow
/// the decimal text rather than its binary approximation.
class Decimal {
 public:
  static std::optional<Decimal> parse(std::string_view text);
  static Decimal from_double(double value);

  /// Digits after the decimal point once trailing zeros are dropped.
  std::size_t fraction_digits() const;

  std::strong_ordering operator<=>(const Decimal& other) const;
  bool operator==(const Decimal& other) const = default;

 private:
  bool negative_ = false;
  std::string digits_;  // no leading/trailing zeros; empty means zero
  long exponent_ = 0;   // value = digits_ * 10^exponent_
};

/// An absolute IRI: a scheme, a colon, and at least one further character
/// that is neither white space nor one of <>"{}|\^`.
bool is_absolute_iri(std::string_view text);

/// The same rule as is_absolute_iri, as an ECMA-262 pattern.
inline constexpr std::string_view absolute_iri_pattern =
    R"(^[A-Za-z][A-Za-z0-9+.\-]*:[^\s<>"{}|\\^`]+$)";

bool is_resource_id(std::string_view text);

/// YYYY-MM-DD naming a real day of the proleptic Gregorian calendar.
bool is_calendar_date(std::string_view text);

std::string json_pointer_escape(std::string_view token);
std::string json_pointer_append(std::string_view base, std::string_view token);
std::string json_pointer_append(std::string_view base, std::size_t index);

/// RFC 3986 percent-encoding of everything except unreserved characters.
std::string percent_encode(std::string_view text);

std::string now_rfc3339();
std::string random_hex(std::size_t bytes);

}  // namespace metaforge
