#include "metaforge/model.hpp"

#include "metaforge/error.hpp"
#include "metaforge/text.hpp"

#include <random>

namespace metaforge {

ResourceId ResourceId::parse(std::string_view text) {
  if (!is_resource_id(text))
    throw Error(errc::model_violation, "not a lowercase UUIDv4: '" + std::string(text) + "'");
  return ResourceId(std::string(text));
}

ResourceId ResourceId::generate() {
  std::string hex = random_hex(16);
  hex[12] = '4';
  static constexpr char variant[] = "89ab";
  hex[16] = variant[std::stoi(hex.substr(16, 1), nullptr, 16) & 3];
  return ResourceId(hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) + "-" +
                    hex.substr(16, 4) + "-" + hex.substr(20, 12));
}

std::string_view to_string(FieldType type) {
  switch (type) {
    case FieldType::text: return "text";
    case FieldType::paragraph: return "paragraph";
    case FieldType::number: return "number";
    case FieldType::date: return "date";
    case FieldType::term: return "term";
  }
  return "text";
}

std::optional<FieldType> field_type_from_string(std::string_view text) {
  if (text == "text") return FieldType::text;
  if (text == "paragraph") return FieldType::paragraph;
  if (text == "number") return FieldType::number;
  if (text == "date") return FieldType::date;
  if (text == "term") return FieldType::term;
  return std::nullopt;
}

std::string_view to_string(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::template_: return "template";
    case TemplateKind::element: return "element";
    case TemplateKind::field: return "field";
  }
  return "template";
}

const std::string& child_name(const TemplateChild& child) {
  static const std::string empty;
  if (const auto* f = std::get_if<FieldSpec>(&child)) return f->name;
  if (const auto* e = std::get_if<Box<Template>>(&child)) return (*e)->name;
  return empty;
}

Cardinality element_cardinality(const Template& element) {
  return element.cardinality.value_or(Cardinality{0, 1});
}

namespace {

bool has_reference(const Template& t) {
  for (const auto& child : t.children) {
    if (std::holds_alternative<Reference>(child)) return true;
    if (const auto* e = std::get_if<Box<Template>>(&child); e && has_reference(**e)) return true;
  }
  return false;
}

}  // namespace

ResolvedTemplate::ResolvedTemplate(Template tree) : tree_(std::move(tree)) {
  if (has_reference(tree_))
    throw Error(errc::model_violation, "resolved template must not contain references");
}

const FieldSpec* find_field(const Template& tree, std::string_view path) {
  const Template* level = &tree;
  while (true) {
    const auto slash = path.find('/');
    const std::string_view head = path.substr(0, slash);
    const TemplateChild* match = nullptr;
    for (const auto& child : level->children)
      if (child_name(child) == head) match = &child;
    if (match == nullptr) return nullptr;
    if (slash == std::string_view::npos) return std::get_if<FieldSpec>(match);
    const auto* element = std::get_if<Box<Template>>(match);
    if (element == nullptr) return nullptr;
    level = &**element;
    path.remove_prefix(slash + 1);
  }
}

std::string template_iri(const ResourceId& id) { return "urn:metaforge:template:" + id.str(); }

const InstanceEntry* InstanceObject::find(std::string_view name) const {
  for (const auto& [key, entry] : fields)
    if (key == name) return &entry;
  return nullptr;
}

}  // namespace metaforge
