#include "metaforge/template_io.hpp"

#include "metaforge/error.hpp"
#include "metaforge/text.hpp"

#include <algorithm>
#include <initializer_list>
#include <regex>
#include <set>

namespace metaforge {

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& message) {
  throw Error(errc::model_violation, message, path);
}

void require_object(const Json& doc, const std::string& path, std::string_view what) {
  if (!doc.is_object()) violation(path, std::string(what) + " must be a JSON object");
}

void allow_keys(const Json& doc, const std::string& path, std::initializer_list<std::string_view> keys) {
  for (const auto& item : doc.items()) {
    if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
      violation(json_pointer_append(path, item.key()), "unexpected key '" + item.key() + "'");
  }
}

std::string get_string(const Json& doc, const std::string& path, const char* key) {
  const std::string at = json_pointer_append(path, key);
  if (!doc.contains(key)) violation(at, std::string("missing '") + key + "'");
  if (!doc[key].is_string()) violation(at, std::string("'") + key + "' must be a string");
  return doc[key].get<std::string>();
}

std::optional<std::string> opt_string(const Json& doc, const std::string& path, const char* key) {
  if (!doc.contains(key)) return std::nullopt;
  if (!doc[key].is_string())
    violation(json_pointer_append(path, key), std::string("'") + key + "' must be a string");
  return doc[key].get<std::string>();
}

std::string get_iri(const Json& doc, const std::string& path, const char* key) {
  std::string value = get_string(doc, path, key);
  if (!is_absolute_iri(value))
    violation(json_pointer_append(path, key), "'" + value + "' is not an absolute IRI");
  return value;
}

std::optional<std::uint64_t> opt_uint(const Json& doc, const std::string& path, const char* key) {
  if (!doc.contains(key)) return std::nullopt;
  const Json& v = doc[key];
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
    violation(json_pointer_append(path, key), std::string("'") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::optional<double> opt_number(const Json& doc, const std::string& path, const char* key) {
  if (!doc.contains(key)) return std::nullopt;
  if (!doc[key].is_number())
    violation(json_pointer_append(path, key), std::string("'") + key + "' must be a number");
  return json_number(doc[key]);
}

void check_child_name(const std::string& name, const std::string& path) {
  if (name.empty()) violation(path, "name must be non-empty");
  if (name.front() == '@') violation(path, "name must not start with '@'");
  if (name.find('/') != std::string::npos) violation(path, "name must not contain '/'");
  if (name == "rdfs:label") violation(path, "name 'rdfs:label' is reserved");
}

bool is_anchored(const std::string& pattern) {
  if (pattern.size() < 2 || pattern.front() != '^' || pattern.back() != '$') return false;
  std::size_t backslashes = 0;
  for (std::size_t k = pattern.size() - 1; k-- > 0 && pattern[k] == '\\';) ++backslashes;
  return backslashes % 2 == 0;
}

Cardinality cardinality_from_json(const Json& doc, const std::string& path) {
  require_object(doc, path, "cardinality");
  allow_keys(doc, path, {"min", "max"});
  Cardinality c;
  const auto min = opt_uint(doc, path, "min");
  if (!min) violation(json_pointer_append(path, "min"), "missing 'min'");
  if (*min > UINT32_MAX) violation(json_pointer_append(path, "min"), "'min' is too large");
  c.min = static_cast<std::uint32_t>(*min);
  const std::string max_path = json_pointer_append(path, "max");
  if (!doc.contains("max")) violation(max_path, "missing 'max'");
  const Json& max = doc["max"];
  if (max.is_string() && max.get<std::string>() == "unbounded") {
    c.max = std::nullopt;
  } else {
    const auto m = opt_uint(doc, path, "max");
    if (*m == 0 || *m > UINT32_MAX) violation(max_path, "'max' must be a positive integer or \"unbounded\"");
    c.max = static_cast<std::uint32_t>(*m);
    if (c.min > *c.max) violation(path, "cardinality min exceeds max");
  }
  return c;
}

ConstraintSource source_from_json(const Json& doc, const std::string& path) {
  require_object(doc, path, "constraint source");
  const std::string type = get_string(doc, path, "type");
  if (type == "ontologyBranch") {
    allow_keys(doc, path, {"type", "source", "rootIri", "includeRoot"});
    OntologyBranch b;
    b.source = get_string(doc, path, "source");
    if (b.source.empty()) violation(json_pointer_append(path, "source"), "source acronym must be non-empty");
    b.rootIri = get_iri(doc, path, "rootIri");
    if (doc.contains("includeRoot")) {
      if (!doc["includeRoot"].is_boolean())
        violation(json_pointer_append(path, "includeRoot"), "'includeRoot' must be a boolean");
      b.includeRoot = doc["includeRoot"].get<bool>();
    }
    return b;
  }
  if (type == "valueSet") {
    allow_keys(doc, path, {"type", "valueSetId"});
    const std::string id = get_string(doc, path, "valueSetId");
    if (!is_resource_id(id)) violation(json_pointer_append(path, "valueSetId"), "valueSetId must be a UUID");
    return ValueSetSource{ResourceId::parse(id)};
  }
  if (type == "literalList") {
    allow_keys(doc, path, {"type", "entries"});
    const std::string entries_path = json_pointer_append(path, "entries");
    if (!doc.contains("entries") || !doc["entries"].is_array())
      violation(entries_path, "'entries' must be an array");
    LiteralList list;
    std::set<std::string> labels;
    std::size_t i = 0;
    for (const Json& entry : doc["entries"]) {
      const std::string at = json_pointer_append(entries_path, i++);
      require_object(entry, at, "literal entry");
      allow_keys(entry, at, {"label", "iri"});
      LiteralEntry e;
      e.label = get_string(entry, at, "label");
      if (entry.contains("iri")) e.iri = get_iri(entry, at, "iri");
      if (!labels.insert(e.label).second)
        violation(json_pointer_append(at, "label"), "duplicate literal label '" + e.label + "'");
      list.entries.push_back(std::move(e));
    }
    return list;
  }
  violation(json_pointer_append(path, "type"), "unknown constraint source type '" + type + "'");
}

FieldConstraints constraints_from_json(FieldType type, const Json& doc, const std::string& path) {
  require_object(doc, path, "constraints");
  switch (type) {
    case FieldType::text:
    case FieldType::paragraph: {
      if (type == FieldType::text) {
        allow_keys(doc, path, {"minLength", "maxLength", "pattern"});
      } else {
        allow_keys(doc, path, {"minLength", "maxLength"});
      }
      TextConstraints c;
      c.minLength = opt_uint(doc, path, "minLength");
      c.maxLength = opt_uint(doc, path, "maxLength");
      if (c.minLength && c.maxLength && *c.minLength > *c.maxLength)
        violation(path, "minLength exceeds maxLength");
      c.pattern = opt_string(doc, path, "pattern");
      if (c.pattern) {
        const std::string at = json_pointer_append(path, "pattern");
        if (!is_anchored(*c.pattern)) violation(at, "pattern must be anchored with ^ and $");
        try {
          std::wregex compiled(to_wide(*c.pattern), std::regex::ECMAScript);
        } catch (const std::regex_error& e) {
          violation(at, std::string("invalid regular expression: ") + e.what());
        }
      }
      return c;
    }
    case FieldType::number: {
      allow_keys(doc, path, {"minimum", "maximum", "decimalPlaces"});
      NumberConstraints c;
      c.minimum = opt_number(doc, path, "minimum");
      c.maximum = opt_number(doc, path, "maximum");
      if (c.minimum && c.maximum && Decimal::from_double(*c.minimum) > Decimal::from_double(*c.maximum))
        violation(path, "minimum exceeds maximum");
      if (const auto places = opt_uint(doc, path, "decimalPlaces")) {
        if (*places > 15) violation(json_pointer_append(path, "decimalPlaces"), "decimalPlaces must be at most 15");
        c.decimalPlaces = static_cast<std::uint32_t>(*places);
      }
      return c;
    }
    case FieldType::date:
      allow_keys(doc, path, {});
      return DateConstraints{};
    case FieldType::term: {
      allow_keys(doc, path, {"sources"});
      const std::string at = json_pointer_append(path, "sources");
      if (!doc.contains("sources") || !doc["sources"].is_array())
        violation(at, "term fields need a 'sources' array");
      ValueConstraintSet set;
      std::size_t i = 0;
      for (const Json& s : doc["sources"]) set.sources.push_back(source_from_json(s, json_pointer_append(at, i++)));
      if (set.sources.empty()) violation(at, "term fields need at least one constraint source");
      return set;
    }
  }
  violation(path, "unknown field type");
}

Json source_to_json(const ConstraintSource& source) {
  Json out = Json::object();
  if (const auto* b = std::get_if<OntologyBranch>(&source)) {
    out["type"] = "ontologyBranch";
    out["source"] = b->source;
    out["rootIri"] = b->rootIri;
    out["includeRoot"] = b->includeRoot;
  } else if (const auto* v = std::get_if<ValueSetSource>(&source)) {
    out["type"] = "valueSet";
    out["valueSetId"] = v->valueSetId.str();
  } else {
    const auto& list = std::get<LiteralList>(source);
    out["type"] = "literalList";
    out["entries"] = Json::array();
    for (const auto& e : list.entries) {
      Json entry = Json::object();
      entry["label"] = e.label;
      if (e.iri) entry["iri"] = *e.iri;
      out["entries"].push_back(std::move(entry));
    }
  }
  return out;
}

Json constraints_to_json(const FieldConstraints& constraints) {
  Json out = Json::object();
  if (const auto* t = std::get_if<TextConstraints>(&constraints)) {
    if (t->minLength) out["minLength"] = *t->minLength;
    if (t->maxLength) out["maxLength"] = *t->maxLength;
    if (t->pattern) out["pattern"] = *t->pattern;
  } else if (const auto* n = std::get_if<NumberConstraints>(&constraints)) {
    if (n->minimum) out["minimum"] = number_json(*n->minimum);
    if (n->maximum) out["maximum"] = number_json(*n->maximum);
    if (n->decimalPlaces) out["decimalPlaces"] = *n->decimalPlaces;
  } else if (const auto* s = std::get_if<ValueConstraintSet>(&constraints)) {
    out["sources"] = Json::array();
    for (const auto& source : s->sources) out["sources"].push_back(source_to_json(source));
  }
  return out;
}

TemplateChild child_from_json(const Json& doc, const std::string& path);

Template template_from_json_at(const Json& doc, const std::string& path) {
  require_object(doc, path, "template document");
  allow_keys(doc, path,
             {"id", "kind", "name", "description", "propertyIri", "cardinality", "annotations", "field",
              "children", "version"});
  Template t;
  const std::string id = get_string(doc, path, "id");
  if (!is_resource_id(id)) violation(json_pointer_append(path, "id"), "id must be a lowercase UUIDv4");
  t.id = ResourceId::parse(id);

  const std::string kind = get_string(doc, path, "kind");
  if (kind == "template") {
    t.kind = TemplateKind::template_;
  } else if (kind == "element") {
    t.kind = TemplateKind::element;
  } else if (kind == "field") {
    t.kind = TemplateKind::field;
  } else {
    violation(json_pointer_append(path, "kind"), "unknown kind '" + kind + "'");
  }

  t.name = get_string(doc, path, "name");
  if (t.name.empty()) violation(json_pointer_append(path, "name"), "name must be non-empty");
  t.description = opt_string(doc, path, "description");

  if (doc.contains("propertyIri")) {
    if (t.kind != TemplateKind::element)
      violation(json_pointer_append(path, "propertyIri"), "only elements carry a propertyIri");
    t.propertyIri = get_iri(doc, path, "propertyIri");
  }
  if (doc.contains("cardinality")) {
    if (t.kind != TemplateKind::element)
      violation(json_pointer_append(path, "cardinality"), "only elements carry a cardinality");
    t.cardinality = cardinality_from_json(doc["cardinality"], json_pointer_append(path, "cardinality"));
  }
  if (doc.contains("annotations"))
    t.annotations = annotations_from_json(doc["annotations"], json_pointer_append(path, "annotations"));

  if (t.kind == TemplateKind::field) {
    if (!doc.contains("field")) violation(json_pointer_append(path, "field"), "field resources need a 'field' payload");
    t.field = field_from_json(doc["field"], json_pointer_append(path, "field"));
    check_child_name(t.field->name, json_pointer_append(json_pointer_append(path, "field"), "name"));
  } else if (doc.contains("field")) {
    violation(json_pointer_append(path, "field"), "only field resources carry a 'field' payload");
  }

  if (doc.contains("children")) {
    const std::string at = json_pointer_append(path, "children");
    if (!doc["children"].is_array()) violation(at, "'children' must be an array");
    if (t.kind == TemplateKind::field && !doc["children"].empty())
      violation(at, "field resources have no children");
    std::set<std::string> names;
    std::size_t i = 0;
    for (const Json& c : doc["children"]) {
      const std::string child_path = json_pointer_append(at, i++);
      TemplateChild child = child_from_json(c, child_path);
      const std::string& name = child_name(child);
      if (!name.empty() && !names.insert(name).second)
        violation(json_pointer_append(child_path, "name"), "duplicate sibling name '" + name + "'");
      t.children.push_back(std::move(child));
    }
  }

  if (const auto version = opt_uint(doc, path, "version")) t.version = *version;
  return t;
}

TemplateChild child_from_json(const Json& doc, const std::string& path) {
  require_object(doc, path, "child");
  if (doc.contains("ref")) {
    allow_keys(doc, path, {"ref", "cardinality"});
    const std::string ref = get_string(doc, path, "ref");
    if (!is_resource_id(ref)) violation(json_pointer_append(path, "ref"), "ref must be a lowercase UUIDv4");
    Reference r{ResourceId::parse(ref), Cardinality{0, 1}};
    if (doc.contains("cardinality"))
      r.cardinality = cardinality_from_json(doc["cardinality"], json_pointer_append(path, "cardinality"));
    return r;
  }
  if (doc.contains("kind")) {
    Template element = template_from_json_at(doc, path);
    if (element.kind != TemplateKind::element)
      violation(json_pointer_append(path, "kind"), "embedded children must be elements");
    check_child_name(element.name, json_pointer_append(path, "name"));
    return Box<Template>(std::move(element));
  }
  if (doc.contains("fieldType")) {
    FieldSpec f = field_from_json(doc, path);
    check_child_name(f.name, json_pointer_append(path, "name"));
    return f;
  }
  violation(path, "child must be a field spec, an embedded element or a reference");
}

}  // namespace

Annotation annotation_from_json(const Json& doc, const std::string& path) {
  require_object(doc, path, "annotation");
  allow_keys(doc, path, {"propertyIri", "termIri", "termLabel"});
  return Annotation{get_iri(doc, path, "propertyIri"), get_iri(doc, path, "termIri"),
                    get_string(doc, path, "termLabel")};
}

std::vector<Annotation> annotations_from_json(const Json& doc, const std::string& path) {
  if (!doc.is_array()) violation(path, "'annotations' must be an array");
  std::vector<Annotation> out;
  std::size_t i = 0;
  for (const Json& a : doc) out.push_back(annotation_from_json(a, json_pointer_append(path, i++)));
  return out;
}

FieldSpec field_from_json(const Json& doc, const std::string& path) {
  require_object(doc, path, "field spec");
  allow_keys(doc, path,
             {"name", "fieldType", "required", "cardinality", "propertyIri", "constraints", "description",
              "annotations"});
  FieldSpec f;
  f.name = get_string(doc, path, "name");
  if (f.name.empty()) violation(json_pointer_append(path, "name"), "name must be non-empty");
  const std::string type = get_string(doc, path, "fieldType");
  const auto parsed = field_type_from_string(type);
  if (!parsed) violation(json_pointer_append(path, "fieldType"), "unknown fieldType '" + type + "'");
  f.fieldType = *parsed;
  if (doc.contains("required")) {
    if (!doc["required"].is_boolean()) violation(json_pointer_append(path, "required"), "'required' must be a boolean");
    f.required = doc["required"].get<bool>();
  }
  f.cardinality = doc.contains("cardinality")
                      ? cardinality_from_json(doc["cardinality"], json_pointer_append(path, "cardinality"))
                      : Cardinality::default_for(f.required);
  if (doc.contains("propertyIri")) f.propertyIri = get_iri(doc, path, "propertyIri");
  const std::string cpath = json_pointer_append(path, "constraints");
  if (doc.contains("constraints")) {
    f.constraints = constraints_from_json(f.fieldType, doc["constraints"], cpath);
  } else {
    f.constraints = constraints_from_json(f.fieldType, Json::object(), cpath);
  }
  f.description = opt_string(doc, path, "description");
  if (doc.contains("annotations"))
    f.annotations = annotations_from_json(doc["annotations"], json_pointer_append(path, "annotations"));
  return f;
}

Template template_from_json(const Json& doc) { return template_from_json_at(doc, ""); }

Template parse_template(std::string_view doc) { return template_from_json(parse_json(doc)); }

Json annotation_to_json(const Annotation& a) {
  Json out = Json::object();
  out["propertyIri"] = a.propertyIri;
  out["termIri"] = a.termIri;
  out["termLabel"] = a.termLabel;
  return out;
}

Json cardinality_to_json(const Cardinality& c) {
  Json out = Json::object();
  out["min"] = c.min;
  if (c.max) {
    out["max"] = *c.max;
  } else {
    out["max"] = "unbounded";
  }
  return out;
}

namespace {

Json annotations_to_json(const std::vector<Annotation>& annotations) {
  Json out = Json::array();
  for (const auto& a : annotations) out.push_back(annotation_to_json(a));
  return out;
}

}  // namespace

Json field_to_json(const FieldSpec& f) {
  Json out = Json::object();
  out["name"] = f.name;
  out["fieldType"] = std::string(to_string(f.fieldType));
  out["required"] = f.required;
  out["cardinality"] = cardinality_to_json(f.cardinality);
  if (f.propertyIri) out["propertyIri"] = *f.propertyIri;
  out["constraints"] = constraints_to_json(f.constraints);
  if (f.description) out["description"] = *f.description;
  out["annotations"] = annotations_to_json(f.annotations);
  return out;
}

Json template_to_json(const Template& t) {
  Json out = Json::object();
  out["id"] = t.id.str();
  out["kind"] = std::string(to_string(t.kind));
  out["name"] = t.name;
  if (t.description) out["description"] = *t.description;
  if (t.propertyIri) out["propertyIri"] = *t.propertyIri;
  if (t.cardinality) out["cardinality"] = cardinality_to_json(*t.cardinality);
  out["annotations"] = annotations_to_json(t.annotations);
  if (t.field) out["field"] = field_to_json(*t.field);
  out["children"] = Json::array();
  for (const auto& child : t.children) {
    if (const auto* f = std::get_if<FieldSpec>(&child)) {
      out["children"].push_back(field_to_json(*f));
    } else if (const auto* e = std::get_if<Box<Template>>(&child)) {
      out["children"].push_back(template_to_json(**e));
    } else {
      const auto& r = std::get<Reference>(child);
      Json ref = Json::object();
      ref["ref"] = r.refId.str();
      ref["cardinality"] = cardinality_to_json(r.cardinality);
      out["children"].push_back(std::move(ref));
    }
  }
  out["version"] = t.version;
  return out;
}

std::string serialize_template(const Template& t) { return dump_canonical(template_to_json(t)); }

}  // namespace metaforge
