#pragma once

#include "metaforge/model.hpp"

#include <functional>
#include <optional>

namespace metaforge {

/// Resolves a reference id to the stored element or field, or nullopt.
using TemplateLookup = std::function<std::optional<Template>(const ResourceId&)>;

/// Inlines every Reference, depth-first and left to right, replacing it with
/// a deep copy of the referenced element or field carrying the reference's
/// cardinality.
///
/// Throws UNRESOLVED_REFERENCE (path of the reference), CYCLE_DETECTED (the
/// ids on the cycle in resolution order, via Error::ids()), or
/// MODEL_VIOLATION when a reference targets a template or inlining produces
/// duplicate sibling names.
ResolvedTemplate resolve_composition(const Template& t, const TemplateLookup& lookup);

}  // namespace metaforge
