#pragma once

#include "metaforge/compiler.hpp"
#include "metaforge/jsonutil.hpp"
#include "metaforge/model.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace metaforge {

struct OntologyTerm {
  std::string iri;
  std::string label;
  std::string source;  // ontology acronym
  std::vector<std::string> synonyms;
  std::string type;    // free-form facet from the remote record ("class", "property", ...)
  bool operator==(const OntologyTerm&) const = default;
};

enum class SkosRelation { exactMatch, closeMatch, broadMatch, narrowMatch };

std::string_view to_string(SkosRelation relation);
std::optional<SkosRelation> skos_relation_from_string(std::string_view text);

struct SkosMapping {
  SkosRelation relation = SkosRelation::exactMatch;
  std::string targetIri;
  bool operator==(const SkosMapping&) const = default;
};

/// A locally minted term, mapped onto existing ontology terms.
struct ProvisionalTerm {
  ResourceId id;
  std::string label;
  std::vector<SkosMapping> mappings;

  std::string iri() const { return "urn:metaforge:term:" + id.str(); }
  bool operator==(const ProvisionalTerm&) const = default;
};

/// Source acronym reported for provisional terms in search results.
inline constexpr std::string_view provisional_source = "METAFORGE";

struct ValueSetMember {
  std::string iri;
  std::string label;
  bool operator==(const ValueSetMember&) const = default;
};

struct ValueSet {
  ResourceId id;
  std::string name;
  std::vector<ValueSetMember> members;
  bool operator==(const ValueSet&) const = default;
};

Json provisional_term_to_json(const ProvisionalTerm& term);
ProvisionalTerm provisional_term_from_json(const Json& doc);
Json value_set_to_json(const ValueSet& set);
/// Mints an id when the document has none. Throws MODEL_VIOLATION or
/// DUPLICATE_MEMBER.
ValueSet value_set_from_json(const Json& doc);
Json ontology_term_to_json(const OntologyTerm& term);

/// Where provisional terms and value sets live.
class TermStore {
 public:
  virtual ~TermStore() = default;
  virtual std::vector<ProvisionalTerm> provisional_terms() const = 0;
  /// `actor` is the creating user, when there is one.
  virtual void add_provisional_term(const ProvisionalTerm& term, const std::optional<ResourceId>& actor) = 0;
  virtual std::optional<ValueSet> value_set(const ResourceId& id) const = 0;
  virtual void add_value_set(const ValueSet& set, const std::optional<ResourceId>& actor) = 0;
};

class InMemoryTermStore : public TermStore {
 public:
  std::vector<ProvisionalTerm> provisional_terms() const override;
  void add_provisional_term(const ProvisionalTerm& term, const std::optional<ResourceId>& actor) override;
  std::optional<ValueSet> value_set(const ResourceId& id) const override;
  void add_value_set(const ValueSet& set, const std::optional<ResourceId>& actor) override;

 private:
  mutable std::mutex mutex_;
  std::vector<ProvisionalTerm> terms_;
  std::map<ResourceId, ValueSet> sets_;
};

struct TerminologyConfig {
  std::string baseUrl;  // empty: no remote configured
  std::string apiKey;
  std::chrono::milliseconds cacheTtl = std::chrono::minutes(10);
  std::chrono::milliseconds timeout = std::chrono::seconds(10);
  std::size_t branchLimit = 10000;
  std::function<std::chrono::steady_clock::time_point()> clock;

  /// Reads METAFORGE_TERMINOLOGY_URL and METAFORGE_TERMINOLOGY_APIKEY.
  static TerminologyConfig from_env();
};

struct TermSearchResult {
  std::vector<OntologyTerm> terms;
  bool degraded = false;  // the remote could not be reached; local terms only
};

/// Orders candidate terms for a query: exact casefolded label match, then
/// label prefix, then substring in label or synonyms; ties by label, with
/// provisional terms after remote ones. Non-matching terms are dropped.
std::vector<OntologyTerm> rank_terms(std::string_view query, const std::vector<OntologyTerm>& remote,
                                     const std::vector<OntologyTerm>& provisional, std::size_t limit);

class TerminologyService {
 public:
  TerminologyService(TerminologyConfig config, std::shared_ptr<TermStore> store);

  /// Throws EMPTY_QUERY. Remote failures degrade to local results.
  TermSearchResult search_terms(std::string_view query, const std::optional<std::string>& source,
                                std::size_t limit) const;

  /// Transitive descendants of rootIri (plus rootIri when includeRoot).
  /// Cached per (source, rootIri) for the configured TTL; an expired entry
  /// is still served when the remote is down. Throws UNKNOWN_TERM,
  /// TERMINOLOGY_UNAVAILABLE or BRANCH_TOO_LARGE.
  std::set<std::string> expand_branch(const std::string& source, const std::string& rootIri,
                                      bool includeRoot) const;

  /// Throws INVALID_ARGUMENT or DUPLICATE_LABEL (unless force).
  ProvisionalTerm create_provisional_term(const std::string& label, std::vector<SkosMapping> mappings,
                                          bool force = false, const std::optional<ResourceId>& actor = {});

  /// Throws INVALID_ARGUMENT, MODEL_VIOLATION or DUPLICATE_MEMBER.
  ValueSet create_value_set(const std::string& name, std::vector<ValueSetMember> members,
                            const std::optional<ResourceId>& actor = {});

  /// Union over the constraint's sources; branch sources are consulted last.
  bool is_member(const ValueConstraintSet& constraints, std::string_view iri) const;

  MembershipOracle membership_oracle() const;

  void clear_cache();

 private:
  struct CacheEntry {
    std::shared_ptr<const std::set<std::string>> descendants;
    std::chrono::steady_clock::time_point fetchedAt;
  };

  std::chrono::steady_clock::time_point now() const;
  std::vector<OntologyTerm> fetch_collection(std::string url, std::size_t cap, bool* not_found) const;

  TerminologyConfig config_;
  std::shared_ptr<TermStore> store_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<std::string, std::string>, CacheEntry> cache_;
  std::mutex write_mutex_;
};

}  // namespace metaforge
