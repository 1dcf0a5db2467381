#include "metaforge/compiler.hpp"

#include "metaforge/error.hpp"
#include "metaforge/instance_io.hpp"
#include "metaforge/text.hpp"

#include <algorithm>
#include <cstdio>

namespace metaforge {

namespace {

constexpr std::string_view rdf_type = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
constexpr std::string_view rdfs_label = "http://www.w3.org/2000/01/rdf-schema#label";
constexpr std::string_view xsd = "http://www.w3.org/2001/XMLSchema#";

std::string iri_term(std::string_view iri) { return "<" + std::string(iri) + ">"; }

std::string literal_text(std::string_view text) {
  std::string out = "\"";
  for (unsigned char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20 || c == 0x7F) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04X", c);
          out += buf;
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out += "\"";
  return out;
}

std::string_view xsd_type(FieldType type) {
  switch (type) {
    case FieldType::number: return "decimal";
    case FieldType::date: return "date";
    default: return "string";
  }
}

const TemplateChild* find_child(const Template& level, const std::string& name) {
  for (const auto& c : level.children)
    if (child_name(c) == name) return &c;
  return nullptr;
}

bool has_filled_leaf(const Template& level, const InstanceObject& obj) {
  for (const auto& [name, entry] : obj.fields) {
    const TemplateChild* child = find_child(level, name);
    if (child == nullptr) continue;
    for (const auto& v : entry.values) {
      const auto* nested = std::get_if<Box<InstanceObject>>(&v);
      if (nested == nullptr) return true;
      if (const auto* e = std::get_if<Box<Template>>(child); e && has_filled_leaf(**e, **nested)) return true;
    }
  }
  return false;
}

class Emitter {
 public:
  std::vector<std::string> lines;

  void object(const Template& level, const InstanceObject& obj, const std::string& subject, const std::string& path) {
    for (const auto& [name, entry] : obj.fields) {
      const TemplateChild* child = find_child(level, name);
      if (child == nullptr) continue;
      const std::string at = json_pointer_append(path, name);
      for (std::size_t i = 0; i < entry.values.size(); ++i) {
        const std::string value_path = entry.array ? json_pointer_append(at, i) : at;
        value(*child, entry.values[i], subject, value_path);
      }
    }
  }

 private:
  void triple(const std::string& s, std::string_view p, const std::string& o) {
    lines.push_back(s + " " + iri_term(p) + " " + o + " .");
  }

  static const std::string& predicate(const std::optional<std::string>& iri, const std::string& path) {
    if (!iri) throw Error(errc::no_property_iri, "no propertyIri for filled field at " + path, path);
    return *iri;
  }

  void value(const TemplateChild& child, const InstanceValue& v, const std::string& subject, const std::string& path) {
    if (const auto* element = std::get_if<Box<Template>>(&child)) {
      const auto* obj = std::get_if<Box<InstanceObject>>(&v);
      if (obj == nullptr || !has_filled_leaf(**element, **obj)) return;
      const std::string& p = predicate((*element)->propertyIri, path);
      const std::string node = "_:e" + std::to_string(++blank_nodes_);
      triple(subject, p, node);
      object(**element, **obj, node, path);
      return;
    }
    const auto& f = std::get<FieldSpec>(child);
    const std::string& p = predicate(f.propertyIri, path);
    if (const auto* lit = std::get_if<LiteralValue>(&v)) {
      triple(subject, p, literal_text(display_text(*lit)) + "^^<" + std::string(xsd) + std::string(xsd_type(f.fieldType)) + ">");
    } else if (const auto* term = std::get_if<TermValue>(&v)) {
      triple(subject, p, iri_term(term->iri));
      triple(iri_term(term->iri), rdfs_label, literal_text(term->label));
    }
  }

  std::size_t blank_nodes_ = 0;
};

}  // namespace

std::string export_ntriples(const ResolvedTemplate& rt, const MetadataInstance& m) {
  Emitter emitter;
  const std::string subject = iri_term(m.instanceId);
  emitter.lines.push_back(subject + " " + iri_term(rdf_type) + " " + iri_term(template_iri(m.templateId)) + " .");
  emitter.object(rt.tree(), m.values, subject, "");
  std::sort(emitter.lines.begin(), emitter.lines.end());
  std::string out;
  for (const auto& line : emitter.lines) {
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace metaforge
