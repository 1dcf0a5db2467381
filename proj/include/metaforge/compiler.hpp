#pragma once

#include "metaforge/jsonutil.hpp"
#include "metaforge/model.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace metaforge {

/// Compiled form of a resolved template.
struct ValidationSchema {
  std::string schemaDoc;  // JSON Schema draft-07 text
  std::vector<std::pair<std::string, std::string>> contextMap;  // name -> propertyIri, document order
  std::map<std::string, ValueConstraintSet> termFields;          // slash path -> constraints
};

/// Maps a resolved template to a draft-07 schema plus JSON-LD context.
/// Deterministic: equal templates give byte-identical schemaDoc.
ValidationSchema compile(const ResolvedTemplate& rt);
Json compile_schema_json(const ResolvedTemplate& rt);

/// JSON-LD @context for instances of the template: rdfs and xsd prefixes,
/// then every named child with a propertyIri, depth-first.
Json instance_context(const ResolvedTemplate& rt);

enum class ErrorCode {
  missing_required,
  type_mismatch,
  out_of_range,
  pattern_mismatch,
  cardinality,
  unknown_field,
  term_not_in_constraint,
};

std::string_view to_string(ErrorCode code);

struct ValidationError {
  std::string path;  // JSON Pointer into the instance document
  ErrorCode code;
  std::string message;
  bool operator==(const ValidationError&) const = default;
};

struct ValidationWarning {
  std::string path;
  std::string message;
  bool operator==(const ValidationWarning&) const = default;
};

struct ValidationReport {
  bool valid = true;
  std::vector<ValidationError> errors;
  std::vector<ValidationWarning> warnings;
};

Json report_to_json(const ValidationReport& report);

/// Decides whether a term IRI satisfies a constraint set. An empty
/// function means membership is not checked; each skipped check is
/// reported as a warning instead.
using MembershipOracle = std::function<bool(const ValueConstraintSet&, std::string_view iri)>;

/// Validates instances against one resolved template. Regular expressions
/// are compiled once per Validator.
class Validator {
 public:
  explicit Validator(const ResolvedTemplate& rt);
  ~Validator();
  Validator(Validator&&) noexcept;
  Validator& operator=(Validator&&) noexcept;

  /// Reports every violated constraint in document order. Errors thrown by
  /// the oracle (an unreachable terminology service) propagate.
  ValidationReport validate(const MetadataInstance& m, const MembershipOracle& membership) const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

ValidationReport validate(const ResolvedTemplate& rt, const MetadataInstance& m, const MembershipOracle& membership);

/// Sorted N-Triples for the instance. Throws NO_PROPERTY_IRI naming the
/// path of a filled field (or element) without a predicate.
std::string export_ntriples(const ResolvedTemplate& rt, const MetadataInstance& m);

}  // namespace metaforge
