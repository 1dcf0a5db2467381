#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace metaforge {

/// Heap-allocated value with deep copy and value equality; lets recursive
/// model types live inside std::variant.
template <typename T>
class Box {
 public:
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}  // NOLINT(implicit)
  Box(const Box& other) : ptr_(std::make_unique<T>(*other.ptr_)) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    if (this != &other) ptr_ = std::make_unique<T>(*other.ptr_);
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;
  ~Box() = default;

  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

  friend bool operator==(const Box& a, const Box& b) { return *a.ptr_ == *b.ptr_; }

 private:
  std::unique_ptr<T> ptr_;
};

/// Lowercase textual UUIDv4.
class ResourceId {
 public:
  ResourceId() = default;
  static ResourceId parse(std::string_view text);  // throws MODEL_VIOLATION
  static ResourceId generate();

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  auto operator<=>(const ResourceId&) const = default;

 private:
  explicit ResourceId(std::string v) : value_(std::move(v)) {}
  std::string value_;
};

struct Annotation {
  std::string propertyIri;
  std::string termIri;
  std::string termLabel;
  bool operator==(const Annotation&) const = default;
};

struct Cardinality {
  std::uint32_t min = 0;
  std::optional<std::uint32_t> max = 1;  // nullopt: unbounded

  bool multi_valued() const { return !max || *max != 1; }
  bool operator==(const Cardinality&) const = default;

  static Cardinality default_for(bool required) { return {required ? 1u : 0u, 1u}; }
};

// Term constraint sources.
struct OntologyBranch {
  std::string source;
  std::string rootIri;
  bool includeRoot = false;
  bool operator==(const OntologyBranch&) const = default;
};

struct ValueSetSource {
  ResourceId valueSetId;
  bool operator==(const ValueSetSource&) const = default;
};

struct LiteralEntry {
  std::string label;
  std::optional<std::string> iri;
  bool operator==(const LiteralEntry&) const = default;
};

struct LiteralList {
  std::vector<LiteralEntry> entries;
  bool operator==(const LiteralList&) const = default;
};

using ConstraintSource = std::variant<OntologyBranch, ValueSetSource, LiteralList>;

struct ValueConstraintSet {
  std::vector<ConstraintSource> sources;
  bool operator==(const ValueConstraintSet&) const = default;
};

enum class FieldType { text, paragraph, number, date, term };

std::string_view to_string(FieldType type);
std::optional<FieldType> field_type_from_string(std::string_view text);

struct TextConstraints {
  std::optional<std::uint64_t> minLength;
  std::optional<std::uint64_t> maxLength;
  std::optional<std::string> pattern;
  bool operator==(const TextConstraints&) const = default;
};

struct NumberConstraints {
  std::optional<double> minimum;
  std::optional<double> maximum;
  std::optional<std::uint32_t> decimalPlaces;
  bool operator==(const NumberConstraints&) const = default;
};

struct DateConstraints {
  bool operator==(const DateConstraints&) const = default;
};

using FieldConstraints = std::variant<TextConstraints, NumberConstraints, DateConstraints, ValueConstraintSet>;

struct FieldSpec {
  std::string name;
  FieldType fieldType = FieldType::text;
  bool required = false;
  Cardinality cardinality;
  std::optional<std::string> propertyIri;
  FieldConstraints constraints;
  std::optional<std::string> description;
  std::vector<Annotation> annotations;

  bool operator==(const FieldSpec&) const = default;
};

struct Reference {
  ResourceId refId;
  Cardinality cardinality;
  bool operator==(const Reference&) const = default;
};

enum class TemplateKind { template_, element, field };

std::string_view to_string(TemplateKind kind);

struct Template;
using TemplateChild = std::variant<FieldSpec, Box<Template>, Reference>;

/// A template, a reusable element, or a standalone field resource.
/// Elements may carry the predicate that links them to their parent and a
/// cardinality used when they are embedded; fields carry their FieldSpec.
struct Template {
  ResourceId id;
  TemplateKind kind = TemplateKind::template_;
  std::string name;
  std::optional<std::string> description;
  std::optional<std::string> propertyIri;
  std::optional<Cardinality> cardinality;
  std::vector<Annotation> annotations;
  std::optional<FieldSpec> field;
  std::vector<TemplateChild> children;
  std::uint64_t version = 0;

  bool operator==(const Template&) const = default;
};

/// Name of a child as it appears in instance documents.
const std::string& child_name(const TemplateChild& child);

/// Effective cardinality of an embedded element (absent means optional, single).
Cardinality element_cardinality(const Template& element);

/// A template whose children contain no References. Only
/// resolve_composition() produces one from a Template with references.
class ResolvedTemplate {
 public:
  /// Throws MODEL_VIOLATION when `tree` still holds a reference.
  explicit ResolvedTemplate(Template tree);

  const Template& tree() const noexcept { return tree_; }
  const ResourceId& id() const noexcept { return tree_.id; }

  bool operator==(const ResolvedTemplate&) const = default;

 private:
  Template tree_;
};

/// Field spec reached by a slash-joined path of child names, if any.
const FieldSpec* find_field(const Template& tree, std::string_view path);

std::string template_iri(const ResourceId& id);

// ---- instances ---------------------------------------------------------

enum class Datatype { string, number, date };

struct LiteralValue {
  std::variant<std::string, double> value;
  Datatype datatype = Datatype::string;

  bool is_number() const { return std::holds_alternative<double>(value); }
  bool operator==(const LiteralValue&) const = default;
};

struct TermValue {
  std::string iri;
  std::string label;
  bool operator==(const TermValue&) const = default;
};

struct InstanceObject;
using InstanceValue = std::variant<LiteralValue, TermValue, Box<InstanceObject>>;

/// One key of an instance object. `array` records whether the document
/// used a JSON array, independent of the number of values.
struct InstanceEntry {
  bool array = false;
  std::vector<InstanceValue> values;
  bool operator==(const InstanceEntry&) const = default;
};

struct InstanceObject {
  std::vector<std::pair<std::string, InstanceEntry>> fields;

  const InstanceEntry* find(std::string_view name) const;
  bool operator==(const InstanceObject&) const = default;
};

struct MetadataInstance {
  // Field name (or prefix) to IRI, in document order.
  std::vector<std::pair<std::string, std::string>> context;
  std::string instanceId;
  ResourceId templateId;
  InstanceObject values;

  bool operator==(const MetadataInstance&) const = default;
};

/// One leaf value with its slash-joined path and normalized match key.
struct FlatPair {
  std::string path;
  std::string valueKey;
  std::string display;
  bool operator==(const FlatPair&) const = default;
};

}  // namespace metaforge
