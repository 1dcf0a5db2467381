#include "metaforge/text.hpp"

#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <random>

namespace metaforge {

namespace {

constexpr char32_t replacement_char = 0xFFFD;

// Decodes one code point starting at text[i]; advances i.
char32_t decode_one(std::string_view text, std::size_t& i) {
  const auto lead = static_cast<unsigned char>(text[i]);
  if (lead < 0x80) {
    ++i;
    return lead;
  }
  int extra = 0;
  char32_t cp = 0;
  if ((lead & 0xE0) == 0xC0) {
    extra = 1;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    extra = 2;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    extra = 3;
    cp = lead & 0x07;
  } else {
    ++i;
    return replacement_char;
  }
  if (i + static_cast<std::size_t>(extra) >= text.size()) {
    i = text.size();
    return replacement_char;
  }
  for (int k = 1; k <= extra; ++k) {
    const auto c = static_cast<unsigned char>(text[i + k]);
    if ((c & 0xC0) != 0x80) {
      i += k;
      return replacement_char;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  i += extra + 1;
  return cp;
}

void encode_one(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)) != 0; }

}  // namespace

std::u32string utf8_decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) out.push_back(decode_one(text, i));
  return out;
}

std::string utf8_encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) encode_one(cp, out);
  return out;
}

std::size_t utf8_length(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size();) {
    decode_one(text, i);
    ++n;
  }
  return n;
}

std::wstring to_wide(std::string_view text) {
  static_assert(sizeof(wchar_t) == 4, "code point regex matching needs 32-bit wchar_t");
  std::wstring out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) out.push_back(static_cast<wchar_t>(decode_one(text, i)));
  return out;
}

std::string casefold(std::string_view text) {
  // full folding, so "ß" and "ss" agree
  std::string out;
  icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())))
      .foldCase(U_FOLD_CASE_DEFAULT)
      .toUTF8String(out);
  return out;
}

std::string trim(std::string_view text) {
  const std::u32string cps = utf8_decode(text);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && is_space(cps[b])) ++b;
  while (e > b && is_space(cps[e - 1])) --e;
  return utf8_encode(std::u32string_view(cps).substr(b, e - b));
}

std::string normalize_text_key(std::string_view text) { return casefold(trim(text)); }

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (std::size_t i = 0; i < text.size();) {
    const char32_t cp = decode_one(text, i);
    if (u_isalnum(static_cast<UChar32>(cp))) {
      encode_one(static_cast<char32_t>(u_foldCase(static_cast<UChar32>(cp), U_FOLD_CASE_DEFAULT)),
                 current);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string canonical_decimal(double value) {
  if (value == 0.0) return "0";
  std::array<char, 400> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed);
  return std::string(buf.data(), res.ptr);
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  Decimal d;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    d.negative_ = text[i] == '-';
    ++i;
  }
  std::string digits;
  long exponent = 0;
  bool any = false;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
    digits.push_back(text[i++]);
    any = true;
  }
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      digits.push_back(text[i++]);
      --exponent;
      any = true;
    }
  }
  if (!any) return std::nullopt;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    long e = 0;
    const auto res = std::from_chars(text.data() + i + (i < text.size() && text[i] == '+' ? 1 : 0),
                                     text.data() + text.size(), e);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) return std::nullopt;
    exponent += e;
    i = text.size();
  }
  if (i != text.size()) return std::nullopt;
  const auto first = digits.find_first_not_of('0');
  if (first == std::string::npos) {
    d.negative_ = false;
    return d;
  }
  digits.erase(0, first);
  while (!digits.empty() && digits.back() == '0') {
    digits.pop_back();
    ++exponent;
  }
  d.digits_ = std::move(digits);
  d.exponent_ = exponent;
  return d;
}

Decimal Decimal::from_double(double value) { return *parse(canonical_decimal(value)); }

std::size_t Decimal::fraction_digits() const {
  return exponent_ < 0 ? static_cast<std::size_t>(-exponent_) : 0;
}

std::strong_ordering Decimal::operator<=>(const Decimal& other) const {
  const bool zero_a = digits_.empty();
  const bool zero_b = other.digits_.empty();
  const int sign_a = zero_a ? 0 : (negative_ ? -1 : 1);
  const int sign_b = zero_b ? 0 : (other.negative_ ? -1 : 1);
  if (sign_a != sign_b) return sign_a <=> sign_b;
  if (sign_a == 0) return std::strong_ordering::equal;
  // Compare magnitudes, then flip for negatives.
  const long mag_a = static_cast<long>(digits_.size()) + exponent_;
  const long mag_b = static_cast<long>(other.digits_.size()) + other.exponent_;
  std::strong_ordering magnitude = mag_a <=> mag_b;
  if (magnitude == std::strong_ordering::equal) {
    const std::size_t n = std::max(digits_.size(), other.digits_.size());
    for (std::size_t k = 0; k < n; ++k) {
      const char a = k < digits_.size() ? digits_[k] : '0';
      const char b = k < other.digits_.size() ? other.digits_[k] : '0';
      if (a != b) {
        magnitude = a <=> b;
        break;
      }
    }
  }
  if (sign_a < 0) return 0 <=> magnitude;
  return magnitude;
}

bool is_absolute_iri(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 >= text.size()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(text[0])) return false;
  for (std::size_t k = 1; k < colon; ++k) {
    const char c = text[k];
    if (!alpha(c) && !digit(c) && c != '+' && c != '.' && c != '-') return false;
  }
  const std::u32string rest = utf8_decode(text.substr(colon + 1));
  for (char32_t cp : rest) {
    if (cp <= 0x20 || cp == 0x7F || cp == replacement_char || is_space(cp)) return false;
    switch (cp) {
      case '<': case '>': case '"': case '{': case '}': case '|': case '\\': case '^': case '`':
        return false;
      default:
        break;
    }
  }
  return true;
}

bool is_resource_id(std::string_view text) {
  if (text.size() != 36) return false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (k == 8 || k == 13 || k == 18 || k == 23) {
      if (c != '-') return false;
    } else if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
      return false;
    }
  }
  return true;
}

bool is_calendar_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  auto num = [&](std::size_t from, std::size_t len, int& out) {
    const auto res = std::from_chars(text.data() + from, text.data() + from + len, out);
    return res.ec == std::errc{} && res.ptr == text.data() + from + len;
  };
  int y = 0, m = 0, d = 0;
  for (std::size_t k : {0, 1, 2, 3, 5, 6, 8, 9})
    if (text[k] < '0' || text[k] > '9') return false;
  if (!num(0, 4, y) || !num(5, 2, m) || !num(8, 2, d)) return false;
  if (m < 1 || m > 12 || d < 1) return false;
  static constexpr std::array<int, 12> days{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  const int limit = (m == 2 && leap) ? 29 : days[static_cast<std::size_t>(m - 1)];
  return d <= limit;
}

std::string json_pointer_escape(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out.push_back(c);
    }
  }
  return out;
}

std::string json_pointer_append(std::string_view base, std::string_view token) {
  std::string out(base);
  out.push_back('/');
  out += json_pointer_escape(token);
  return out;
}

std::string json_pointer_append(std::string_view base, std::size_t index) {
  return json_pointer_append(base, std::to_string(index));
}

std::string percent_encode(std::string_view text) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
        c == '.' || c == '_' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(hex[c >> 4]);
      out.push_back(hex[c & 0xF]);
    }
  }
  return out;
}

std::string now_rfc3339() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const std::time_t secs = system_clock::to_time_t(now);
  const auto millis = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  std::array<char, 32> buf{};
  const std::size_t n = std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%S", &tm);
  std::array<char, 8> frac{};
  std::snprintf(frac.data(), frac.size(), ".%03dZ", static_cast<int>(millis));
  return std::string(buf.data(), n) + frac.data();
}

std::string random_hex(std::size_t bytes) {
  static constexpr char hex[] = "0123456789abcdef";
  thread_local std::random_device device;
  std::string out;
  out.reserve(bytes * 2);
  for (std::size_t k = 0; k < bytes; ++k) {
    const unsigned v = device() & 0xFFu;
    out.push_back(hex[v >> 4]);
    out.push_back(hex[v & 0xF]);
  }
  return out;
}

}  // namespace metaforge
