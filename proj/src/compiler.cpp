#include "metaforge/compiler.hpp"

#include "metaforge/text.hpp"

#include <string>

namespace metaforge {

namespace {

Json keyword_pattern_properties() {
  Json p = Json::object();
  p["^@"] = Json::object();
  return p;
}

Json string_schema(const TextConstraints& c) {
  Json s = Json::object();
  s["type"] = "string";
  if (c.minLength) s["minLength"] = *c.minLength;
  if (c.maxLength) s["maxLength"] = *c.maxLength;
  if (c.pattern) s["pattern"] = *c.pattern;
  return s;
}

Json number_schema(const NumberConstraints& c) {
  Json s = Json::object();
  s["type"] = "number";
  if (c.minimum) s["minimum"] = number_json(*c.minimum);
  if (c.maximum) s["maximum"] = number_json(*c.maximum);
  if (c.decimalPlaces) s["multipleOf"] = number_json(std::stod("1e-" + std::to_string(*c.decimalPlaces)));
  return s;
}

Json date_schema() {
  Json s = Json::object();
  s["type"] = "string";
  s["format"] = "date";
  s["pattern"] = R"(^\d{4}-\d{2}-\d{2}$)";
  return s;
}

// A literal may be written bare or as a value object.
Json literal_schema(const Json& value_schema, std::initializer_list<const char*> datatypes) {
  Json object_form = Json::object();
  object_form["type"] = "object";
  object_form["properties"] = Json::object();
  object_form["properties"]["@value"] = value_schema;
  Json type_enum = Json::array();
  for (const char* d : datatypes) type_enum.push_back(d);
  object_form["properties"]["@type"] = Json{{"enum", type_enum}};
  object_form["properties"]["rdfs:label"] = Json::object();
  object_form["required"] = Json::array({"@value"});
  object_form["patternProperties"] = keyword_pattern_properties();
  object_form["additionalProperties"] = false;

  Json s = Json::object();
  s["anyOf"] = Json::array({value_schema, object_form});
  return s;
}

Json term_schema() {
  Json s = Json::object();
  s["type"] = "object";
  s["properties"] = Json::object();
  s["properties"]["@id"] = Json{{"type", "string"}, {"pattern", std::string(absolute_iri_pattern)}};
  s["properties"]["rdfs:label"] = Json{{"type", "string"}};
  s["required"] = Json::array({"@id", "rdfs:label"});
  s["patternProperties"] = keyword_pattern_properties();
  s["additionalProperties"] = false;
  return s;
}

Json field_value_schema(const FieldSpec& f) {
  switch (f.fieldType) {
    case FieldType::text:
    case FieldType::paragraph:
      return literal_schema(string_schema(std::get<TextConstraints>(f.constraints)), {"xsd:string"});
    case FieldType::number:
      return literal_schema(number_schema(std::get<NumberConstraints>(f.constraints)), {"xsd:decimal"});
    case FieldType::date:
      return literal_schema(date_schema(), {"xsd:date", "xsd:string"});
    case FieldType::term:
      return term_schema();
  }
  return Json::object();
}

Json with_cardinality(Json item, const Cardinality& c) {
  if (!c.multi_valued()) return item;
  Json s = Json::object();
  s["type"] = "array";
  s["items"] = std::move(item);
  s["minItems"] = c.min;
  if (c.max) s["maxItems"] = *c.max;
  return s;
}

Json object_schema(const Template& level, bool root) {
  Json s = Json::object();
  if (root) {
    s["$schema"] = "http://json-schema.org/draft-07/schema#";
    s["title"] = level.name;
    if (level.description) s["description"] = *level.description;
  }
  s["type"] = "object";
  Json properties = Json::object();
  if (root) {
    properties["@context"] = Json{{"type", "object"}};
    properties["@id"] = Json{{"type", "string"}, {"pattern", std::string(absolute_iri_pattern)}};
    properties["@type"] = Json{{"type", "string"}, {"pattern", "^urn:metaforge:template:"}};
  }
  properties["rdfs:label"] = Json::object();
  Json required = root ? Json::array({"@id", "@type"}) : Json::array();
  for (const auto& child : level.children) {
    if (const auto* f = std::get_if<FieldSpec>(&child)) {
      properties[f->name] = with_cardinality(field_value_schema(*f), f->cardinality);
      if (f->required) required.push_back(f->name);
    } else if (const auto* e = std::get_if<Box<Template>>(&child)) {
      const Cardinality c = element_cardinality(**e);
      properties[(*e)->name] = with_cardinality(object_schema(**e, false), c);
      if (c.min >= 1) required.push_back((*e)->name);
    }
  }
  s["properties"] = std::move(properties);
  if (!required.empty()) s["required"] = std::move(required);
  s["patternProperties"] = keyword_pattern_properties();
  s["additionalProperties"] = false;
  return s;
}

void collect(const Template& level, const std::string& prefix, ValidationSchema& out) {
  for (const auto& child : level.children) {
    const std::string& name = child_name(child);
    const std::string path = prefix.empty() ? name : prefix + "/" + name;
    std::optional<std::string> iri;
    if (const auto* f = std::get_if<FieldSpec>(&child)) {
      iri = f->propertyIri;
      if (f->fieldType == FieldType::term) out.termFields[path] = std::get<ValueConstraintSet>(f->constraints);
    } else if (const auto* e = std::get_if<Box<Template>>(&child)) {
      iri = (*e)->propertyIri;
    }
    if (iri) {
      bool seen = false;
      for (const auto& [key, value] : out.contextMap) seen = seen || key == name;
      if (!seen) out.contextMap.emplace_back(name, *iri);
    }
    if (const auto* e = std::get_if<Box<Template>>(&child)) collect(**e, path, out);
  }
}

}  // namespace

Json compile_schema_json(const ResolvedTemplate& rt) { return object_schema(rt.tree(), true); }

ValidationSchema compile(const ResolvedTemplate& rt) {
  ValidationSchema out;
  out.schemaDoc = dump_canonical(compile_schema_json(rt));
  collect(rt.tree(), "", out);
  return out;
}

Json instance_context(const ResolvedTemplate& rt) {
  ValidationSchema names;
  collect(rt.tree(), "", names);
  Json ctx = Json::object();
  ctx["rdfs"] = "http://www.w3.org/2000/01/rdf-schema#";
  ctx["xsd"] = "http://www.w3.org/2001/XMLSchema#";
  for (const auto& [name, iri] : names.contextMap) ctx[name] = iri;
  return ctx;
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::missing_required: return "MISSING_REQUIRED";
    case ErrorCode::type_mismatch: return "TYPE_MISMATCH";
    case ErrorCode::out_of_range: return "OUT_OF_RANGE";
    case ErrorCode::pattern_mismatch: return "PATTERN_MISMATCH";
    case ErrorCode::cardinality: return "CARDINALITY";
    case ErrorCode::unknown_field: return "UNKNOWN_FIELD";
    case ErrorCode::term_not_in_constraint: return "TERM_NOT_IN_CONSTRAINT";
  }
  return "TYPE_MISMATCH";
}

Json report_to_json(const ValidationReport& report) {
  Json out = Json::object();
  out["valid"] = report.valid;
  out["errors"] = Json::array();
  for (const auto& e : report.errors) {
    Json item = Json::object();
    item["path"] = e.path;
    item["code"] = std::string(to_string(e.code));
    item["message"] = e.message;
    out["errors"].push_back(std::move(item));
  }
  out["warnings"] = Json::array();
  for (const auto& w : report.warnings) {
    Json item = Json::object();
    item["path"] = w.path;
    item["message"] = w.message;
    out["warnings"].push_back(std::move(item));
  }
  return out;
}

}  // namespace metaforge
