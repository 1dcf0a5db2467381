#pragma once

#include "metaforge/jsonutil.hpp"
#include "metaforge/model.hpp"

#include <string>
#include <string_view>

namespace metaforge {

/// Parses a template, element or field document. Throws MALFORMED_JSON for
/// unparseable text and MODEL_VIOLATION (with a JSON Pointer path) for any
/// violated model invariant.
Template parse_template(std::string_view doc);
Template template_from_json(const Json& doc);

/// Canonical text: fixed key order, 2-space indentation, LF endings.
std::string serialize_template(const Template& t);
Json template_to_json(const Template& t);

Json annotation_to_json(const Annotation& a);
Json cardinality_to_json(const Cardinality& c);
Json field_to_json(const FieldSpec& f);

/// Parses a field spec object; `path` prefixes error locations.
FieldSpec field_from_json(const Json& doc, const std::string& path = "");
Annotation annotation_from_json(const Json& doc, const std::string& path = "");
std::vector<Annotation> annotations_from_json(const Json& doc, const std::string& path = "");

}  // namespace metaforge
