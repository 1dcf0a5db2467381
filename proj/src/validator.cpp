#include "metaforge/compiler.hpp"

#include "metaforge/text.hpp"

#include <regex>
#include <unordered_map>

namespace metaforge {

struct Validator::Impl {
  Template tree;
  std::unordered_map<std::string, std::wregex> patterns;

  const std::wregex& pattern(const std::string& source) const { return patterns.at(source); }

  void compile_patterns(const Template& level) {
    for (const auto& child : level.children) {
      if (const auto* f = std::get_if<FieldSpec>(&child)) {
        if (const auto* t = std::get_if<TextConstraints>(&f->constraints); t && t->pattern)
          patterns.try_emplace(*t->pattern, to_wide(*t->pattern), std::regex::ECMAScript);
      } else if (const auto* e = std::get_if<Box<Template>>(&child)) {
        compile_patterns(**e);
      }
    }
  }
};

namespace {

class Run {
 public:
  Run(const Validator::Impl& impl, const MembershipOracle& membership, ValidationReport& report)
      : impl_(impl), membership_(membership), report_(report) {}

  void object(const Template& level, const InstanceObject& obj, const std::string& path) {
    for (const auto& child : level.children) {
      const std::string& name = child_name(child);
      bool required = false;
      if (const auto* f = std::get_if<FieldSpec>(&child)) {
        required = f->required;
      } else if (const auto* e = std::get_if<Box<Template>>(&child)) {
        required = element_cardinality(**e).min >= 1;
      }
      if (required && obj.find(name) == nullptr)
        error(path, ErrorCode::missing_required, "missing required field '" + name + "'");
    }
    for (const auto& [name, entry] : obj.fields) {
      const std::string at = json_pointer_append(path, name);
      const TemplateChild* child = nullptr;
      for (const auto& c : level.children)
        if (child_name(c) == name) child = &c;
      if (child == nullptr) {
        error(at, ErrorCode::unknown_field, "field '" + name + "' is not defined by the template");
        continue;
      }
      this->entry(*child, entry, at);
    }
  }

 private:
  void error(const std::string& path, ErrorCode code, std::string message) {
    report_.valid = false;
    report_.errors.push_back({path, code, std::move(message)});
  }

  void entry(const TemplateChild& child, const InstanceEntry& e, const std::string& path) {
    const auto* field = std::get_if<FieldSpec>(&child);
    const Cardinality card = field != nullptr ? field->cardinality : element_cardinality(*std::get<Box<Template>>(child));
    if (card.multi_valued()) {
      if (!e.array) {
        error(path, ErrorCode::type_mismatch, "expected an array of values");
        return;
      }
      const auto n = e.values.size();
      if (n < card.min || (card.max && n > *card.max)) {
        error(path, ErrorCode::cardinality,
              "expected " + std::to_string(card.min) + ".." + (card.max ? std::to_string(*card.max) : "*") +
                  " values, found " + std::to_string(n));
      }
      for (std::size_t i = 0; i < n; ++i) value(child, e.values[i], json_pointer_append(path, i));
    } else {
      if (e.array) {
        error(path, ErrorCode::type_mismatch, "expected a single value, not an array");
        return;
      }
      value(child, e.values.front(), path);
    }
  }

  void value(const TemplateChild& child, const InstanceValue& v, const std::string& path) {
    if (const auto* element = std::get_if<Box<Template>>(&child)) {
      const auto* obj = std::get_if<Box<InstanceObject>>(&v);
      if (obj == nullptr) {
        error(path, ErrorCode::type_mismatch, "expected an element object");
        return;
      }
      object(**element, **obj, path);
      return;
    }
    const auto& f = std::get<FieldSpec>(child);
    switch (f.fieldType) {
      case FieldType::text:
      case FieldType::paragraph: text(f, v, path); break;
      case FieldType::number: number(f, v, path); break;
      case FieldType::date: date(v, path); break;
      case FieldType::term: term(f, v, path); break;
    }
  }

  void text(const FieldSpec& f, const InstanceValue& v, const std::string& path) {
    const auto* lit = std::get_if<LiteralValue>(&v);
    if (lit == nullptr || lit->is_number() || lit->datatype != Datatype::string) {
      error(path, ErrorCode::type_mismatch, "expected a text literal");
      return;
    }
    const auto& s = std::get<std::string>(lit->value);
    const auto& c = std::get<TextConstraints>(f.constraints);
    const std::size_t len = utf8_length(s);
    if (c.minLength && len < *c.minLength)
      error(path, ErrorCode::out_of_range, "text shorter than " + std::to_string(*c.minLength) + " characters");
    if (c.maxLength && len > *c.maxLength)
      error(path, ErrorCode::out_of_range, "text longer than " + std::to_string(*c.maxLength) + " characters");
    if (c.pattern && !std::regex_search(to_wide(s), impl_.pattern(*c.pattern)))
      error(path, ErrorCode::pattern_mismatch, "text does not match " + *c.pattern);
  }

  void number(const FieldSpec& f, const InstanceValue& v, const std::string& path) {
    const auto* lit = std::get_if<LiteralValue>(&v);
    if (lit == nullptr || !lit->is_number() || lit->datatype != Datatype::number) {
      error(path, ErrorCode::type_mismatch, "expected a numeric literal");
      return;
    }
    const auto& c = std::get<NumberConstraints>(f.constraints);
    const Decimal value = Decimal::from_double(std::get<double>(lit->value));
    if (c.minimum && value < Decimal::from_double(*c.minimum))
      error(path, ErrorCode::out_of_range, "value below minimum " + canonical_decimal(*c.minimum));
    if (c.maximum && value > Decimal::from_double(*c.maximum))
      error(path, ErrorCode::out_of_range, "value above maximum " + canonical_decimal(*c.maximum));
    if (c.decimalPlaces && value.fraction_digits() > *c.decimalPlaces)
      error(path, ErrorCode::out_of_range,
            "more than " + std::to_string(*c.decimalPlaces) + " decimal places");
  }

  void date(const InstanceValue& v, const std::string& path) {
    const auto* lit = std::get_if<LiteralValue>(&v);
    if (lit == nullptr || lit->is_number() || lit->datatype == Datatype::number) {
      error(path, ErrorCode::type_mismatch, "expected a date literal");
      return;
    }
    const auto& s = std::get<std::string>(lit->value);
    bool shape = s.size() == 10 && s[4] == '-' && s[7] == '-';
    for (std::size_t k : {0, 1, 2, 3, 5, 6, 8, 9}) shape = shape && s[k] >= '0' && s[k] <= '9';
    if (!shape) {
      error(path, ErrorCode::pattern_mismatch, "dates are written YYYY-MM-DD");
    } else if (!is_calendar_date(s)) {
      error(path, ErrorCode::out_of_range, "'" + s + "' is not a calendar date");
    }
  }

  void term(const FieldSpec& f, const InstanceValue& v, const std::string& path) {
    const auto* t = std::get_if<TermValue>(&v);
    if (t == nullptr) {
      error(path, ErrorCode::type_mismatch, "expected an ontology term {\"@id\", \"rdfs:label\"}");
      return;
    }
    if (!membership_) {
      report_.warnings.push_back({path, "term membership not checked for <" + t->iri + ">"});
      return;
    }
    if (!membership_(std::get<ValueConstraintSet>(f.constraints), t->iri))
      error(path, ErrorCode::term_not_in_constraint, "<" + t->iri + "> is not an allowed value");
  }

  const Validator::Impl& impl_;
  const MembershipOracle& membership_;
  ValidationReport& report_;
};

}  // namespace

Validator::Validator(const ResolvedTemplate& rt) : impl_(std::make_unique<Impl>()) {
  impl_->tree = rt.tree();
  impl_->compile_patterns(impl_->tree);
}

Validator::~Validator() = default;
Validator::Validator(Validator&&) noexcept = default;
Validator& Validator::operator=(Validator&&) noexcept = default;

ValidationReport Validator::validate(const MetadataInstance& m, const MembershipOracle& membership) const {
  ValidationReport report;
  Run run(*impl_, membership, report);
  run.object(impl_->tree, m.values, "");
  return report;
}

ValidationReport validate(const ResolvedTemplate& rt, const MetadataInstance& m, const MembershipOracle& membership) {
  return Validator(rt).validate(m, membership);
}

}  // namespace metaforge
