#include "metaforge/composition.hpp"

#include "metaforge/error.hpp"
#include "metaforge/text.hpp"

#include <algorithm>
#include <set>

namespace metaforge {

namespace {

class Resolver {
 public:
  explicit Resolver(const TemplateLookup& lookup) : lookup_(lookup) {}

  Template resolve(const Template& t, const std::string& path) {
    Template out = t;
    out.children.clear();
    std::set<std::string> names;
    for (std::size_t i = 0; i < t.children.size(); ++i) {
      const std::string child_path = json_pointer_append(json_pointer_append(path, "children"), i);
      TemplateChild resolved = resolve_child(t.children[i], child_path);
      const std::string& name = child_name(resolved);
      if (!names.insert(name).second)
        throw Error(errc::model_violation, "duplicate sibling name '" + name + "' after composition", child_path);
      out.children.push_back(std::move(resolved));
    }
    return out;
  }

 private:
  TemplateChild resolve_child(const TemplateChild& child, const std::string& path) {
    if (const auto* f = std::get_if<FieldSpec>(&child)) return *f;
    if (const auto* e = std::get_if<Box<Template>>(&child)) return Box<Template>(resolve(**e, path));

    const auto& ref = std::get<Reference>(child);
    const auto on_stack = std::find(stack_.begin(), stack_.end(), ref.refId);
    if (on_stack != stack_.end()) {
      std::vector<std::string> cycle;
      for (auto it = on_stack; it != stack_.end(); ++it) cycle.push_back(it->str());
      throw Error(errc::cycle_detected, "reference cycle through " + ref.refId.str(), path, std::move(cycle));
    }
    std::optional<Template> target = lookup_(ref.refId);
    if (!target) throw Error(errc::unresolved_reference, "no resource with id " + ref.refId.str(), path);

    if (target->kind == TemplateKind::field) {
      if (!target->field) throw Error(errc::model_violation, "field resource without a field payload", path);
      FieldSpec f = *target->field;
      f.cardinality = ref.cardinality;
      return f;
    }
    if (target->kind != TemplateKind::element)
      throw Error(errc::model_violation, "references may only target elements or fields", path);

    stack_.push_back(ref.refId);
    Template element = resolve(*target, path);
    stack_.pop_back();
    element.cardinality = ref.cardinality;
    return Box<Template>(std::move(element));
  }

  const TemplateLookup& lookup_;
  std::vector<ResourceId> stack_;
};

}  // namespace

ResolvedTemplate resolve_composition(const Template& t, const TemplateLookup& lookup) {
  Resolver resolver(lookup);
  return ResolvedTemplate(resolver.resolve(t, ""));
}

}  // namespace metaforge
