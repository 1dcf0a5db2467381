#include "metaforge/instance_io.hpp"

namespace metaforge {

namespace {

void flatten_object(const InstanceObject& object, const std::string& prefix, std::vector<FlatPair>& out) {
  for (const auto& [name, entry] : object.fields) {
    const std::string path = prefix.empty() ? name : prefix + "/" + name;
    for (const auto& value : entry.values) {
      if (const auto* lit = std::get_if<LiteralValue>(&value)) {
        out.push_back({path, value_key(*lit), display_text(*lit)});
      } else if (const auto* term = std::get_if<TermValue>(&value)) {
        out.push_back({path, value_key(*term), term->label});
      } else {
        flatten_object(*std::get<Box<InstanceObject>>(value), path, out);
      }
    }
  }
}

}  // namespace

std::vector<FlatPair> flatten_instance(const MetadataInstance& m) {
  std::vector<FlatPair> out;
  flatten_object(m.values, "", out);
  return out;
}

}  // namespace metaforge
