#pragma once

#include "metaforge/jsonutil.hpp"
#include "metaforge/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace metaforge {

/// Parses a metadata instance in the JSON-LD profile:
///   literal   {"@value": v} with optional "@type" xsd:string|xsd:decimal|xsd:date,
///             or a bare JSON string/number as shorthand
///   term      {"@id": iri, "rdfs:label": label}
///   element   a JSON object of child fields
///   repeated  a JSON array of any of the above
/// Unknown field names are kept; rejecting them is validation's job.
MetadataInstance parse_instance(std::string_view doc);
MetadataInstance instance_from_json(const Json& doc);

std::string serialize_instance(const MetadataInstance& m);
Json instance_to_json(const MetadataInstance& m);

/// Leaf values in depth-first document order, array indices elided.
std::vector<FlatPair> flatten_instance(const MetadataInstance& m);

/// Normalized match key of a single leaf value.
std::string value_key(const LiteralValue& v);
std::string value_key(const TermValue& v);
std::string display_text(const LiteralValue& v);

}  // namespace metaforge
