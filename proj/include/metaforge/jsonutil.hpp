#pragma once

#include <json.hpp>

#include <string>
#include <string_view>

namespace metaforge {

// Documents keep key order, so canonical output is stable.
using Json = nlohmann::ordered_json;

/// Parses UTF-8 JSON text; throws MALFORMED_JSON.
Json parse_json(std::string_view text);

/// 2-space indented text with a trailing LF.
std::string dump_canonical(const Json& doc);

/// Integral values within the exactly representable range are emitted as
/// JSON integers, everything else as shortest round-trip doubles.
Json number_json(double value);

/// Reads any JSON number as a double.
double json_number(const Json& value);

std::string_view json_type_name(const Json& value);

}  // namespace metaforge
