#include "metaforge/jsonutil.hpp"

#include "metaforge/error.hpp"

#include <cmath>

namespace metaforge {

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(errc::malformed_json, e.what());
  }
}

std::string dump_canonical(const Json& doc) {
  return doc.dump(2, ' ', false, Json::error_handler_t::replace) + "\n";
}

Json number_json(double value) {
  constexpr double exact_limit = 9007199254740992.0;  // 2^53
  if (std::isfinite(value) && std::trunc(value) == value && std::fabs(value) < exact_limit) {
    return Json(static_cast<std::int64_t>(value));
  }
  return Json(value);
}

double json_number(const Json& value) {
  if (value.is_number_unsigned()) return static_cast<double>(value.get<std::uint64_t>());
  if (value.is_number_integer()) return static_cast<double>(value.get<std::int64_t>());
  return value.get<double>();
}

std::string_view json_type_name(const Json& value) { return value.type_name(); }

}  // namespace metaforge
