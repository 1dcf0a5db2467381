#include "metaforge/terminology.hpp"

#include "metaforge/error.hpp"
#include "metaforge/http_util.hpp"
#include "metaforge/text.hpp"

#include <algorithm>
#include <cstdlib>
#include <tuple>

namespace metaforge {

std::string_view to_string(SkosRelation relation) {
  switch (relation) {
    case SkosRelation::exactMatch: return "exactMatch";
    case SkosRelation::closeMatch: return "closeMatch";
    case SkosRelation::broadMatch: return "broadMatch";
    case SkosRelation::narrowMatch: return "narrowMatch";
  }
  return "exactMatch";
}

std::optional<SkosRelation> skos_relation_from_string(std::string_view text) {
  if (text.starts_with("skos:")) text.remove_prefix(5);
  for (auto r : {SkosRelation::exactMatch, SkosRelation::closeMatch, SkosRelation::broadMatch, SkosRelation::narrowMatch})
    if (to_string(r) == text) return r;
  return std::nullopt;
}

namespace {

const std::string& require_string(const Json& doc, const char* key, const std::string& path) {
  if (!doc.is_object() || !doc.contains(key) || !doc[key].is_string())
    throw Error(errc::model_violation, std::string("expected string member '") + key + "'",
                json_pointer_append(path, key));
  return doc[key].get_ref<const std::string&>();
}

}  // namespace

Json provisional_term_to_json(const ProvisionalTerm& term) {
  Json out = Json::object();
  out["id"] = term.id.str();
  out["label"] = term.label;
  out["iri"] = term.iri();
  out["mappings"] = Json::array();
  for (const auto& m : term.mappings)
    out["mappings"].push_back(Json{{"relation", std::string(to_string(m.relation))}, {"targetIri", m.targetIri}});
  return out;
}

ProvisionalTerm provisional_term_from_json(const Json& doc) {
  ProvisionalTerm t;
  t.id = ResourceId::parse(require_string(doc, "id", ""));
  t.label = require_string(doc, "label", "");
  if (doc.contains("mappings")) {
    if (!doc["mappings"].is_array()) throw Error(errc::model_violation, "mappings must be an array", "/mappings");
    for (std::size_t i = 0; i < doc["mappings"].size(); ++i) {
      const std::string at = json_pointer_append("/mappings", i);
      const auto& m = doc["mappings"][i];
      auto relation = skos_relation_from_string(require_string(m, "relation", at));
      if (!relation) throw Error(errc::model_violation, "unknown SKOS relation", at + "/relation");
      t.mappings.push_back({*relation, require_string(m, "targetIri", at)});
    }
  }
  return t;
}

Json value_set_to_json(const ValueSet& set) {
  Json out = Json::object();
  out["id"] = set.id.str();
  out["name"] = set.name;
  out["members"] = Json::array();
  for (const auto& m : set.members) out["members"].push_back(Json{{"iri", m.iri}, {"label", m.label}});
  return out;
}

ValueSet value_set_from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(errc::model_violation, "value set must be an object");
  ValueSet set;
  set.id = doc.contains("id") ? ResourceId::parse(require_string(doc, "id", "")) : ResourceId::generate();
  set.name = require_string(doc, "name", "");
  if (!doc.contains("members") || !doc["members"].is_array())
    throw Error(errc::model_violation, "members must be an array", "/members");
  for (std::size_t i = 0; i < doc["members"].size(); ++i) {
    const std::string at = json_pointer_append("/members", i);
    const auto& m = doc["members"][i];
    ValueSetMember member{require_string(m, "iri", at), m.contains("label") ? require_string(m, "label", at) : ""};
    if (!is_absolute_iri(member.iri)) throw Error(errc::model_violation, "member IRI must be absolute", at + "/iri");
    for (const auto& seen : set.members)
      if (seen.iri == member.iri) throw Error(errc::duplicate_member, "repeated member <" + member.iri + ">", at + "/iri");
    set.members.push_back(std::move(member));
  }
  return set;
}

Json ontology_term_to_json(const OntologyTerm& term) {
  Json out = Json::object();
  out["iri"] = term.iri;
  out["label"] = term.label;
  out["source"] = term.source;
  out["synonyms"] = term.synonyms;
  if (!term.type.empty()) out["type"] = term.type;
  return out;
}

// ---- stores ------------------------------------------------------------

std::vector<ProvisionalTerm> InMemoryTermStore::provisional_terms() const {
  std::lock_guard lock(mutex_);
  return terms_;
}

void InMemoryTermStore::add_provisional_term(const ProvisionalTerm& term, const std::optional<ResourceId>&) {
  std::lock_guard lock(mutex_);
  terms_.push_back(term);
}

std::optional<ValueSet> InMemoryTermStore::value_set(const ResourceId& id) const {
  std::lock_guard lock(mutex_);
  auto it = sets_.find(id);
  if (it == sets_.end()) return std::nullopt;
  return it->second;
}

void InMemoryTermStore::add_value_set(const ValueSet& set, const std::optional<ResourceId>&) {
  std::lock_guard lock(mutex_);
  sets_.insert_or_assign(set.id, set);
}

// ---- ranking -----------------------------------------------------------

TerminologyConfig TerminologyConfig::from_env() {
  TerminologyConfig c;
  if (const char* url = std::getenv("METAFORGE_TERMINOLOGY_URL")) c.baseUrl = url;
  if (const char* key = std::getenv("METAFORGE_TERMINOLOGY_APIKEY")) c.apiKey = key;
  return c;
}

std::vector<OntologyTerm> rank_terms(std::string_view query, const std::vector<OntologyTerm>& remote,
                                     const std::vector<OntologyTerm>& provisional, std::size_t limit) {
  const std::string q = casefold(trim(query));
  struct Ranked {
    int tier;
    bool provisional;
    const OntologyTerm* term;
  };
  std::vector<Ranked> ranked;
  std::vector<std::string> seen;
  auto consider = [&](const OntologyTerm& t, bool is_provisional) {
    if (std::find(seen.begin(), seen.end(), t.iri) != seen.end()) return;
    const std::string label = casefold(t.label);
    int tier = -1;
    if (label == q) {
      tier = 0;
    } else if (label.starts_with(q)) {
      tier = 1;
    } else if (label.find(q) != std::string::npos) {
      tier = 2;
    } else {
      for (const auto& s : t.synonyms)
        if (casefold(s).find(q) != std::string::npos) tier = 2;
    }
    if (tier < 0) return;
    seen.push_back(t.iri);
    ranked.push_back({tier, is_provisional, &t});
  };
  for (const auto& t : remote) consider(t, false);
  for (const auto& t : provisional) consider(t, true);
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return std::tie(a.tier, a.term->label, a.provisional, a.term->iri) <
           std::tie(b.tier, b.term->label, b.provisional, b.term->iri);
  });
  std::vector<OntologyTerm> out;
  for (const auto& r : ranked) {
    if (out.size() == limit) break;
    out.push_back(*r.term);
  }
  return out;
}

// ---- service -----------------------------------------------------------

namespace {

struct RemoteFailure {
  std::string message;
};

OntologyTerm term_from_record(const Json& record) {
  OntologyTerm t;
  if (!record.is_object() || !record.contains("@id") || !record["@id"].is_string())
    throw RemoteFailure{"term record without @id"};
  t.iri = record["@id"].get<std::string>();
  if (record.contains("prefLabel") && record["prefLabel"].is_string()) t.label = record["prefLabel"].get<std::string>();
  if (record.contains("synonym")) {
    const auto& s = record["synonym"];
    if (s.is_string()) t.synonyms.push_back(s.get<std::string>());
    if (s.is_array())
      for (const auto& item : s)
        if (item.is_string()) t.synonyms.push_back(item.get<std::string>());
  }
  if (record.contains("ontology") && record["ontology"].is_string()) {
    std::string ont = record["ontology"].get<std::string>();
    if (auto slash = ont.rfind('/'); slash != std::string::npos) ont = ont.substr(slash + 1);
    t.source = ont;
  }
  if (record.contains("type") && record["type"].is_string()) t.type = record["type"].get<std::string>();
  return t;
}

std::optional<std::string> next_page(const Json& page, const std::string& base) {
  const Json* link = nullptr;
  if (page.contains("links") && page["links"].is_object() && page["links"].contains("nextPage"))
    link = &page["links"]["nextPage"];
  else if (page.contains("nextPage"))
    link = &page["nextPage"];
  if (link == nullptr || !link->is_string() || link->get_ref<const std::string&>().empty()) return std::nullopt;
  const std::string& url = link->get_ref<const std::string&>();
  if (is_http_url(url)) return url;
  if (url.starts_with("/")) return split_url(base).origin + url;
  throw RemoteFailure{"unusable nextPage link"};
}

}  // namespace

TerminologyService::TerminologyService(TerminologyConfig config, std::shared_ptr<TermStore> store)
    : config_(std::move(config)), store_(std::move(store)) {
  if (!store_) store_ = std::make_shared<InMemoryTermStore>();
  while (config_.baseUrl.ends_with('/')) config_.baseUrl.pop_back();
}

std::chrono::steady_clock::time_point TerminologyService::now() const {
  return config_.clock ? config_.clock() : std::chrono::steady_clock::now();
}

// Follows nextPage links. Throws RemoteFailure for anything but a
// well-formed 2xx collection; a 404 sets *not_found instead.
std::vector<OntologyTerm> TerminologyService::fetch_collection(std::string url, std::size_t cap, bool* not_found) const {
  HttpHeaders headers;
  if (!config_.apiKey.empty()) headers.emplace("Authorization", "apikey token=" + config_.apiKey);
  std::vector<OntologyTerm> out;
  std::vector<std::string> visited;
  for (;;) {
    if (std::find(visited.begin(), visited.end(), url) != visited.end()) throw RemoteFailure{"nextPage loop"};
    visited.push_back(url);
    auto res = http_get(url, headers, config_.timeout);
    if (!res) throw RemoteFailure{"no response from " + url};
    if (res->status == 404 && not_found != nullptr) {
      *not_found = true;
      return {};
    }
    if (res->status < 200 || res->status > 299) throw RemoteFailure{"HTTP " + std::to_string(res->status) + " from " + url};
    Json page;
    try {
      page = parse_json(res->body);
    } catch (const Error&) {
      throw RemoteFailure{"malformed body from " + url};
    }
    if (!page.is_object() || !page.contains("collection") || !page["collection"].is_array())
      throw RemoteFailure{"response has no collection"};
    for (const auto& record : page["collection"]) {
      out.push_back(term_from_record(record));
      if (out.size() > cap) return out;
    }
    auto next = next_page(page, url);
    if (!next) return out;
    url = *next;
  }
}

TermSearchResult TerminologyService::search_terms(std::string_view query, const std::optional<std::string>& source,
                                                  std::size_t limit) const {
  const std::string q = trim(query);
  if (q.empty()) throw Error(errc::empty_query, "query is empty");
  if (limit == 0) throw Error(errc::invalid_argument, "limit must be positive");

  TermSearchResult result;
  std::vector<OntologyTerm> remote;
  if (config_.baseUrl.empty()) {
    result.degraded = true;
  } else {
    std::vector<std::pair<std::string, std::string>> params{{"q", q}};
    if (source) params.emplace_back("ontologies", *source);
    params.emplace_back("pagesize", std::to_string(std::max<std::size_t>(limit, 50)));
    try {
      remote = fetch_collection(config_.baseUrl + with_query("/search", params), config_.branchLimit, nullptr);
    } catch (const RemoteFailure&) {
      result.degraded = true;
      remote.clear();
    }
  }

  std::vector<OntologyTerm> local;
  if (!source || *source == provisional_source) {
    for (const auto& p : store_->provisional_terms())
      local.push_back({p.iri(), p.label, std::string(provisional_source), {}, "provisional"});
  }
  result.terms = rank_terms(q, remote, local, limit);
  return result;
}

std::set<std::string> TerminologyService::expand_branch(const std::string& source, const std::string& rootIri,
                                                        bool includeRoot) const {
  const auto key = std::make_pair(source, rootIri);
  std::shared_ptr<const std::set<std::string>> cached;
  bool fresh = false;
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      cached = it->second.descendants;
      fresh = now() - it->second.fetchedAt < config_.cacheTtl;
    }
  }

  if (!fresh) {
    try {
      if (config_.baseUrl.empty()) throw RemoteFailure{"no terminology service configured"};
      bool not_found = false;
      const std::string url = config_.baseUrl + "/ontologies/" + percent_encode(source) + "/classes/" +
                              percent_encode(rootIri) + "/descendants?pagesize=500";
      auto terms = fetch_collection(url, config_.branchLimit, &not_found);
      if (not_found) throw Error(errc::unknown_term, "<" + rootIri + "> is not a term of " + source);
      if (terms.size() > config_.branchLimit)
        throw Error(errc::branch_too_large,
                    "branch under <" + rootIri + "> exceeds " + std::to_string(config_.branchLimit) + " terms");
      auto fetched = std::make_shared<std::set<std::string>>();
      for (const auto& t : terms) fetched->insert(t.iri);
      cached = fetched;
      std::lock_guard lock(cache_mutex_);
      cache_.insert_or_assign(key, CacheEntry{cached, now()});
    } catch (const RemoteFailure& failure) {
      if (!cached) throw Error(errc::terminology_unavailable, failure.message);
    }
  }

  std::set<std::string> out = *cached;
  if (includeRoot) out.insert(rootIri);
  else out.erase(rootIri);
  return out;
}

ProvisionalTerm TerminologyService::create_provisional_term(const std::string& label, std::vector<SkosMapping> mappings,
                                                            bool force, const std::optional<ResourceId>& actor) {
  const std::string clean = trim(label);
  if (clean.empty()) throw Error(errc::invalid_argument, "label is empty", "/label");
  for (std::size_t i = 0; i < mappings.size(); ++i)
    if (!is_absolute_iri(mappings[i].targetIri))
      throw Error(errc::invalid_argument, "mapping target must be an absolute IRI",
                  json_pointer_append("/mappings", i) + "/targetIri");
  std::lock_guard lock(write_mutex_);
  if (!force) {
    const std::string key = casefold(clean);
    for (const auto& existing : store_->provisional_terms())
      if (casefold(existing.label) == key)
        throw Error(errc::duplicate_label, "a provisional term labeled '" + existing.label + "' exists", "/label",
                    {existing.id.str()});
  }
  ProvisionalTerm term{ResourceId::generate(), clean, std::move(mappings)};
  store_->add_provisional_term(term, actor);
  return term;
}

ValueSet TerminologyService::create_value_set(const std::string& name, std::vector<ValueSetMember> members,
                                             const std::optional<ResourceId>& actor) {
  if (trim(name).empty()) throw Error(errc::invalid_argument, "name is empty", "/name");
  if (members.empty()) throw Error(errc::invalid_argument, "a value set needs at least one member", "/members");
  Json doc = Json::object();
  doc["name"] = name;
  doc["members"] = Json::array();
  for (const auto& m : members) doc["members"].push_back(Json{{"iri", m.iri}, {"label", m.label}});
  ValueSet set = value_set_from_json(doc);
  std::lock_guard lock(write_mutex_);
  store_->add_value_set(set, actor);
  return set;
}

bool TerminologyService::is_member(const ValueConstraintSet& constraints, std::string_view iri) const {
  for (const auto& source : constraints.sources) {
    if (const auto* list = std::get_if<LiteralList>(&source)) {
      for (const auto& e : list->entries)
        if (e.iri && *e.iri == iri) return true;
    } else if (const auto* vs = std::get_if<ValueSetSource>(&source)) {
      if (auto set = store_->value_set(vs->valueSetId))
        for (const auto& m : set->members)
          if (m.iri == iri) return true;
    }
  }
  for (const auto& source : constraints.sources) {
    if (const auto* branch = std::get_if<OntologyBranch>(&source)) {
      if (branch->includeRoot && branch->rootIri == iri) return true;
      if (expand_branch(branch->source, branch->rootIri, branch->includeRoot).contains(std::string(iri))) return true;
    }
  }
  return false;
}

MembershipOracle TerminologyService::membership_oracle() const {
  return [this](const ValueConstraintSet& c, std::string_view iri) { return is_member(c, iri); };
}

void TerminologyService::clear_cache() {
  std::lock_guard lock(cache_mutex_);
  cache_.clear();
}

}  // namespace metaforge
