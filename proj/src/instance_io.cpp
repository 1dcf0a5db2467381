#include "metaforge/instance_io.hpp"

#include "metaforge/error.hpp"
#include "metaforge/text.hpp"

namespace metaforge {

namespace {

constexpr std::string_view template_iri_prefix = "urn:metaforge:template:";

[[noreturn]] void violation(const std::string& path, const std::string& message) {
  throw Error(errc::model_violation, message, path);
}

bool is_keyword(const std::string& key) { return !key.empty() && key.front() == '@'; }

Datatype default_datatype(const LiteralValue& v) { return v.is_number() ? Datatype::number : Datatype::string; }

InstanceObject object_from_json(const Json& doc, const std::string& path);

LiteralValue literal_from_scalar(const Json& v, const std::string& path) {
  if (v.is_string()) return LiteralValue{v.get<std::string>(), Datatype::string};
  if (v.is_number()) return LiteralValue{json_number(v), Datatype::number};
  violation(path, std::string("unsupported literal of JSON type ") + std::string(json_type_name(v)));
}

InstanceValue value_from_json(const Json& doc, const std::string& path) {
  if (!doc.is_object()) {
    if (doc.is_array()) violation(path, "nested arrays are not part of the instance profile");
    return literal_from_scalar(doc, path);
  }
  if (doc.contains("@value")) {
    LiteralValue lit = literal_from_scalar(doc["@value"], json_pointer_append(path, "@value"));
    lit.datatype = default_datatype(lit);
    for (const auto& item : doc.items()) {
      if (!is_keyword(item.key()) && item.key() != "rdfs:label")
        violation(json_pointer_append(path, item.key()), "unexpected key '" + item.key() + "' in a literal value");
    }
    if (doc.contains("@type")) {
      const std::string at = json_pointer_append(path, "@type");
      if (!doc["@type"].is_string()) violation(at, "'@type' must be a string");
      const auto type = doc["@type"].get<std::string>();
      if (type == "xsd:string") {
        lit.datatype = Datatype::string;
      } else if (type == "xsd:decimal") {
        lit.datatype = Datatype::number;
      } else if (type == "xsd:date") {
        lit.datatype = Datatype::date;
      } else {
        violation(at, "unsupported literal datatype '" + type + "'");
      }
    }
    return lit;
  }
  if (doc.contains("@id") || doc.contains("rdfs:label")) {
    if (!doc.contains("@id")) violation(path, "term value needs '@id'");
    const std::string id_path = json_pointer_append(path, "@id");
    if (!doc["@id"].is_string()) violation(id_path, "'@id' must be a string");
    TermValue term;
    term.iri = doc["@id"].get<std::string>();
    if (!is_absolute_iri(term.iri)) violation(id_path, "'" + term.iri + "' is not an absolute IRI");
    const std::string label_path = json_pointer_append(path, "rdfs:label");
    if (!doc.contains("rdfs:label")) violation(label_path, "term value needs 'rdfs:label'");
    if (!doc["rdfs:label"].is_string()) violation(label_path, "'rdfs:label' must be a string");
    term.label = doc["rdfs:label"].get<std::string>();
    for (const auto& item : doc.items()) {
      if (!is_keyword(item.key()) && item.key() != "rdfs:label")
        violation(json_pointer_append(path, item.key()), "unexpected key '" + item.key() + "' in a term value");
    }
    return term;
  }
  return Box<InstanceObject>(object_from_json(doc, path));
}

InstanceObject object_from_json(const Json& doc, const std::string& path) {
  InstanceObject object;
  for (const auto& item : doc.items()) {
    if (is_keyword(item.key())) continue;
    const std::string at = json_pointer_append(path, item.key());
    InstanceEntry entry;
    if (item.value().is_array()) {
      entry.array = true;
      std::size_t i = 0;
      for (const Json& v : item.value()) entry.values.push_back(value_from_json(v, json_pointer_append(at, i++)));
    } else {
      entry.values.push_back(value_from_json(item.value(), at));
    }
    object.fields.emplace_back(item.key(), std::move(entry));
  }
  return object;
}

Json literal_to_json(const LiteralValue& lit) {
  Json out = Json::object();
  if (lit.is_number()) {
    out["@value"] = number_json(std::get<double>(lit.value));
  } else {
    out["@value"] = std::get<std::string>(lit.value);
  }
  if (lit.datatype != default_datatype(lit)) {
    switch (lit.datatype) {
      case Datatype::string: out["@type"] = "xsd:string"; break;
      case Datatype::number: out["@type"] = "xsd:decimal"; break;
      case Datatype::date: out["@type"] = "xsd:date"; break;
    }
  }
  return out;
}

Json object_to_json(const InstanceObject& object);

Json value_to_json(const InstanceValue& value) {
  if (const auto* lit = std::get_if<LiteralValue>(&value)) return literal_to_json(*lit);
  if (const auto* term = std::get_if<TermValue>(&value)) {
    Json out = Json::object();
    out["@id"] = term->iri;
    out["rdfs:label"] = term->label;
    return out;
  }
  return object_to_json(*std::get<Box<InstanceObject>>(value));
}

Json object_to_json(const InstanceObject& object) {
  Json out = Json::object();
  for (const auto& [name, entry] : object.fields) {
    if (entry.array) {
      Json values = Json::array();
      for (const auto& v : entry.values) values.push_back(value_to_json(v));
      out[name] = std::move(values);
    } else {
      out[name] = value_to_json(entry.values.front());
    }
  }
  return out;
}

}  // namespace

MetadataInstance instance_from_json(const Json& doc) {
  if (!doc.is_object()) violation("", "instance document must be a JSON object");
  MetadataInstance m;
  if (doc.contains("@context")) {
    const Json& ctx = doc["@context"];
    if (!ctx.is_object()) violation("/@context", "'@context' must be an object");
    for (const auto& item : ctx.items()) {
      if (!item.value().is_string())
        violation(json_pointer_append("/@context", item.key()), "context entries must be IRI strings");
      m.context.emplace_back(item.key(), item.value().get<std::string>());
    }
  }
  if (!doc.contains("@id") || !doc["@id"].is_string()) violation("/@id", "instance needs a string '@id'");
  m.instanceId = doc["@id"].get<std::string>();
  if (!is_absolute_iri(m.instanceId)) violation("/@id", "'" + m.instanceId + "' is not an absolute IRI");
  if (!doc.contains("@type") || !doc["@type"].is_string()) violation("/@type", "instance needs a string '@type'");
  const std::string type = doc["@type"].get<std::string>();
  if (!type.starts_with(template_iri_prefix) || !is_resource_id(type.substr(template_iri_prefix.size())))
    violation("/@type", "'@type' must be a template IRI urn:metaforge:template:<id>");
  m.templateId = ResourceId::parse(type.substr(template_iri_prefix.size()));
  m.values = object_from_json(doc, "");
  return m;
}

MetadataInstance parse_instance(std::string_view doc) { return instance_from_json(parse_json(doc)); }

Json instance_to_json(const MetadataInstance& m) {
  Json out = Json::object();
  out["@context"] = Json::object();
  for (const auto& [key, iri] : m.context) out["@context"][key] = iri;
  out["@id"] = m.instanceId;
  out["@type"] = template_iri(m.templateId);
  Json values = object_to_json(m.values);
  for (auto& item : values.items()) out[item.key()] = std::move(item.value());
  return out;
}

std::string serialize_instance(const MetadataInstance& m) { return dump_canonical(instance_to_json(m)); }

std::string value_key(const LiteralValue& v) {
  if (v.is_number()) return canonical_decimal(std::get<double>(v.value));
  return normalize_text_key(std::get<std::string>(v.value));
}

std::string value_key(const TermValue& v) { return v.iri; }

std::string display_text(const LiteralValue& v) {
  if (v.is_number()) return canonical_decimal(std::get<double>(v.value));
  return std::get<std::string>(v.value);
}

}  // namespace metaforge
