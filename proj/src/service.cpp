#include "metaforge/service.hpp"

#include "metaforge/composition.hpp"
#include "metaforge/error.hpp"
#include "metaforge/instance_io.hpp"
#include "metaforge/template_io.hpp"
#include "metaforge/text.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <functional>

namespace metaforge {

std::optional<std::string> HttpRequest::param(const std::string& key) const {
  auto it = query.find(key);
  if (it == query.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> HttpRequest::header(const std::string& name) const {
  auto it = headers.find(name);
  if (it == headers.end()) return std::nullopt;
  return it->second;
}

int http_status_for(std::string_view code) {
  if (code == errc::unauthenticated) return 401;
  if (code == errc::permission_denied) return 403;
  if (code == errc::not_found || code == errc::route_not_found) return 404;
  if (code == errc::method_not_allowed) return 405;
  if (code == errc::version_conflict) return 409;
  if (code == errc::invalid_payload || code == errc::model_violation || code == errc::validation_failed) return 422;
  if (code == errc::terminology_unavailable || code == errc::validator_unavailable || code == errc::submission_unavailable)
    return 502;
  if (code == errc::storage_failure || code == errc::io_error) return 500;
  return 400;
}

Json error_body(const Error& e) {
  Json out = Json::object();
  out["error"] = e.code();
  out["message"] = e.what();
  if (!e.path().empty()) out["path"] = e.path();
  if (!e.ids().empty()) out["ids"] = e.ids();
  if (const auto* d = dynamic_cast<const DetailedError*>(&e)) out[d->key()] = d->details();
  return out;
}

std::string validation_body(const ValidationReport& report) { return dump_canonical(report_to_json(report)); }

std::string suggestions_body(const std::vector<Suggestion>& suggestions) {
  return dump_canonical(suggestions_to_json(suggestions));
}

ServiceConfig ServiceConfig::from_env() {
  ServiceConfig c;
  if (const char* dir = std::getenv("METAFORGE_DATA_DIR"); dir != nullptr && *dir != '\0') c.dataDir = dir;
  c.terminology = TerminologyConfig::from_env();
  c.targets = load_targets(c.dataDir);
  return c;
}

// ---- routing -----------------------------------------------------------

struct Service::Context {
  const HttpRequest& request;
  ResourceId actor;
  std::vector<std::string> params;  // values of {placeholders}, in order
};

struct Service::Route {
  std::string method;
  std::string pattern;
  std::string summary;
  bool authenticated = true;
  std::function<HttpResponse(Context&)> handler;
};

namespace {

constexpr std::string_view api_prefix = "/api/v1";

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto end = path.find('/', start);
    const auto piece = path.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (!piece.empty()) out.emplace_back(piece);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

bool match_route(const std::string& pattern, const std::vector<std::string>& segments, std::vector<std::string>& params) {
  const auto parts = split_path(pattern);
  if (parts.size() != segments.size()) return false;
  std::vector<std::string> found;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].front() == '{') found.push_back(segments[i]);
    else if (parts[i] != segments[i]) return false;
  }
  params = std::move(found);
  return true;
}

HttpResponse json_response(int status, const Json& body) { return {status, "application/json", dump_canonical(body), {}}; }

HttpResponse error_response(const Error& e) {
  HttpResponse res = json_response(http_status_for(e.code()), error_body(e));
  return res;
}

Json parse_body(const HttpRequest& req) {
  if (trim(req.body).empty()) throw Error(errc::malformed_json, "request body is empty");
  return parse_json(req.body);
}

ResourceId id_from(const std::string& text) {
  if (!is_resource_id(text)) throw Error(errc::not_found, "no resource " + text);
  return ResourceId::parse(text);
}

std::string body_string(const Json& body, const char* key, bool required = true) {
  if (!body.is_object()) throw Error(errc::invalid_argument, "request body must be an object");
  if (!body.contains(key) || body[key].is_null()) {
    if (required) throw Error(errc::invalid_argument, std::string("missing '") + key + "'", json_pointer_append("", key));
    return {};
  }
  if (!body[key].is_string()) throw Error(errc::invalid_argument, std::string("'") + key + "' must be a string", json_pointer_append("", key));
  return body[key].get<std::string>();
}

bool body_bool(const Json& body, const char* key) {
  if (!body.contains(key) || body[key].is_null()) return false;
  if (!body[key].is_boolean()) throw Error(errc::invalid_argument, std::string("'") + key + "' must be a boolean", json_pointer_append("", key));
  return body[key].get<bool>();
}

std::uint64_t positive_integer(const std::string& text, const std::string& what) {
  std::uint64_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || value == 0)
    throw Error(errc::invalid_argument, what + " must be a positive integer");
  return value;
}

std::uint64_t body_count(const Json& body, const char* key, std::uint64_t fallback) {
  if (!body.contains(key) || body[key].is_null()) return fallback;
  if (!body[key].is_number_unsigned() || body[key].get<std::uint64_t>() == 0)
    throw Error(errc::invalid_argument, std::string("'") + key + "' must be a positive integer", json_pointer_append("", key));
  return body[key].get<std::uint64_t>();
}

bool is_template_kind(ResourceType t) {
  return t == ResourceType::template_ || t == ResourceType::element || t == ResourceType::field;
}

Json records_json(const std::vector<ResourceRecord>& records) {
  Json out = Json::array();
  for (const auto& r : records) out.push_back(record_to_json(r));
  return out;
}

HttpResponse record_response(int status, const ResourceRecord& r) {
  HttpResponse res = json_response(status, record_to_json(r));
  res.headers.emplace_back("ETag", "\"" + std::to_string(r.version) + "\"");
  return res;
}

}  // namespace

// ---- service -----------------------------------------------------------

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  repo_ = std::make_unique<Repository>(config_.dataDir);
  store_ = std::make_shared<RepositoryTermStore>(*repo_);
  terminology_ = std::make_unique<TerminologyService>(config_.terminology, store_);
  std::map<ResourceId, std::vector<MetadataInstance>> corpora;
  for (const auto& r : repo_->records_of_type(ResourceType::instance)) {
    auto m = instance_from_json(r.payload);
    corpora[m.templateId].push_back(std::move(m));
  }
  for (const auto& [id, instances] : corpora) index_.reset(id, instances);
  register_routes();
}

Service::~Service() = default;

ResolvedTemplate Service::resolve(const ResourceId& templateId) const {
  auto record = repo_->find(templateId);
  if (!record || !is_template_kind(record->resourceType)) throw Error(errc::not_found, "no template " + templateId.str());
  TemplateLookup lookup = [this](const ResourceId& id) -> std::optional<Template> {
    auto r = repo_->find(id);
    if (!r || !is_template_kind(r->resourceType)) return std::nullopt;
    return template_from_json(r->payload);
  };
  return resolve_composition(template_from_json(record->payload), lookup);
}

void Service::reindex(const ResourceId& templateId) {
  std::vector<MetadataInstance> instances;
  for (const auto& r : repo_->records_of_type(ResourceType::instance)) {
    auto m = instance_from_json(r.payload);
    if (m.templateId == templateId) instances.push_back(std::move(m));
  }
  index_.reset(templateId, instances);
}

HttpResponse Service::dispatch(const HttpRequest& request) {
  try {
    std::string_view path = request.path;
    if (path == "/openapi.json") return json_response(200, openapi());
    if (!path.starts_with(api_prefix)) throw Error(errc::route_not_found, "no route " + request.path);
    path.remove_prefix(api_prefix.size());
    if (request.method == "OPTIONS") return {204, "application/json", "", {}};

    const auto segments = split_path(path);
    const Route* route = nullptr;
    std::vector<std::string> params;
    std::string allowed;
    for (const auto& r : routes_) {
      std::vector<std::string> p;
      if (!match_route(r.pattern, segments, p)) continue;
      if (r.method == request.method) {
        route = &r;
        params = std::move(p);
        break;
      }
      allowed += (allowed.empty() ? "" : ", ") + r.method;
    }
    if (route == nullptr) {
      if (allowed.empty()) throw Error(errc::route_not_found, "no route " + request.path);
      HttpResponse res = error_response(Error(errc::method_not_allowed, request.method + " is not allowed here"));
      res.headers.emplace_back("Allow", allowed);
      return res;
    }

    Context ctx{request, {}, std::move(params)};
    if (route->authenticated) {
      // Missing and unknown keys get the same answer.
      const Error denied(errc::unauthenticated, "missing or unknown API key");
      constexpr std::string_view scheme = "apikey token=";
      const auto auth = request.header("authorization");
      if (!auth || !auth->starts_with(scheme)) throw denied;
      auto user = repo_->user_by_token(std::string_view(*auth).substr(scheme.size()));
      if (!user) throw denied;
      ctx.actor = user->id;
    }
    return route->handler(ctx);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const nlohmann::json::exception& e) {
    return error_response(Error(errc::invalid_argument, e.what()));
  } catch (const std::exception& e) {
    return json_response(500, Json{{"error", "INTERNAL"}, {"message", e.what()}});
  }
}

Json Service::openapi() const {
  Json doc = Json::object();
  doc["openapi"] = "3.0.3";
  doc["info"] = Json{{"title", "metaforge"}, {"version", "1"}};
  doc["components"] = Json::object();
  doc["components"]["securitySchemes"] = Json::object();
  doc["components"]["securitySchemes"]["apikey"] =
      Json{{"type", "apiKey"}, {"in", "header"}, {"name", "Authorization"}, {"description", "apikey token=<key>"}};
  Json paths = Json::object();
  for (const auto& r : routes_) {
    const std::string key = std::string(api_prefix) + r.pattern;
    if (!paths.contains(key)) paths[key] = Json::object();
    Json op = Json::object();
    op["summary"] = r.summary;
    Json parameters = Json::array();
    for (const auto& part : split_path(r.pattern))
      if (part.front() == '{')
        parameters.push_back(Json{{"name", part.substr(1, part.size() - 2)}, {"in", "path"}, {"required", true},
                                  {"schema", Json{{"type", "string"}}}});
    if (!parameters.empty()) op["parameters"] = std::move(parameters);
    op["security"] = r.authenticated ? Json::array({Json{{"apikey", Json::array()}}}) : Json::array();
    op["responses"] = Json::object();
    op["responses"]["default"] = Json{{"description", "JSON body, or {\"error\", \"message\", \"path\"?} on failure"}};
    std::string method = r.method;
    std::transform(method.begin(), method.end(), method.begin(), [](unsigned char c) { return std::tolower(c); });
    paths[key][method] = std::move(op);
  }
  doc["paths"] = std::move(paths);
  return doc;
}

void Service::register_routes() {
  auto add = [this](std::string method, std::string pattern, std::string summary, auto handler, bool auth = true) {
    routes_.push_back({std::move(method), std::move(pattern), std::move(summary), auth, std::move(handler)});
  };

  auto home_of = [this](const ResourceId& actor) {
    auto u = repo_->user(actor);
    return u ? u->homeFolder : Repository::root_folder();
  };

  // Parses and checks a template-kind payload before it reaches the store.
  auto check_template = [this](Json& payload, const ResourceId& id) {
    if (payload.is_object() && !payload.contains("id")) payload["id"] = id.str();
    Template t;
    try {
      t = template_from_json(payload);
    } catch (const Error& e) {
      throw Error(errc::invalid_payload, e.what(), e.path());
    }
    TemplateLookup lookup = [this, &t](const ResourceId& ref) -> std::optional<Template> {
      if (ref == t.id) return t;
      auto r = repo_->find(ref);
      if (!r || !is_template_kind(r->resourceType)) return std::nullopt;
      return template_from_json(r->payload);
    };
    resolve_composition(t, lookup);
  };

  // Instances must be valid against their (readable) template.
  auto check_instance = [this](const Json& payload, const ResourceId& actor) {
    MetadataInstance m;
    try {
      m = instance_from_json(payload);
    } catch (const Error& e) {
      throw Error(errc::invalid_payload, e.what(), e.path());
    }
    repo_->get_resource(m.templateId, actor);
    const ResolvedTemplate rt = resolve(m.templateId);
    const ValidationReport report = validate(rt, m, terminology_->membership_oracle());
    if (!report.valid)
      throw DetailedError(errc::validation_failed, "instance fails validation", "report", report_to_json(report));
    return m;
  };

  auto create = [=, this](ResourceType type) {
    return [=, this](Context& ctx) {
      Json body = parse_body(ctx.request);
      ResourceRecord r;
      r.resourceType = type;
      r.parentFolder = ctx.request.param("folder") ? id_from(*ctx.request.param("folder")) : home_of(ctx.actor);
      r.id = ResourceId::generate();
      if (body.is_object() && body.contains("id") && body["id"].is_string() && is_resource_id(body["id"].get<std::string>()))
        r.id = ResourceId::parse(body["id"].get<std::string>());
      if (repo_->find(r.id)) throw Error(errc::invalid_argument, "resource " + r.id.str() + " already exists", "/id");
      std::optional<ResourceId> indexed;
      if (is_template_kind(type)) {
        check_template(body, r.id);
      } else if (type == ResourceType::instance) {
        indexed = check_instance(body, ctx.actor).templateId;
        r.name = ctx.request.param("name").value_or("");
      } else if (type == ResourceType::folder) {
        r.name = body_string(body, "name");
        r.description = body_string(body, "description", false);
        if (body.contains("parentFolder")) r.parentFolder = id_from(body_string(body, "parentFolder"));
        body = Json::object();
      }
      r.payload = std::move(body);
      ResourceRecord stored = repo_->put_resource(std::move(r), std::nullopt, ctx.actor);
      if (indexed) reindex(*indexed);
      return record_response(201, stored);
    };
  };

  add("POST", "/templates", "Create a template", create(ResourceType::template_));
  add("POST", "/elements", "Create an element", create(ResourceType::element));
  add("POST", "/fields", "Create a standalone field", create(ResourceType::field));
  add("POST", "/instances", "Create a metadata instance (rejected with 422 when invalid)", create(ResourceType::instance));
  add("POST", "/folders", "Create a folder", create(ResourceType::folder));

  add("POST", "/value-sets", "Create a value set", [this](Context& ctx) {
    const Json body = parse_body(ctx.request);
    const ValueSet draft = value_set_from_json(Json{{"name", body_string(body, "name")}, {"members", body.value("members", Json::array())}});
    const ValueSet set = terminology_->create_value_set(draft.name, draft.members, ctx.actor);
    return record_response(201, *repo_->find(set.id));
  });

  add("GET", "/resources/{id}", "Read a resource record", [this](Context& ctx) {
    return record_response(200, repo_->get_resource(id_from(ctx.params[0]), ctx.actor));
  });

  add("PUT", "/resources/{id}", "Update a resource (If-Match: <version>)", [=, this](Context& ctx) {
    const ResourceId id = id_from(ctx.params[0]);
    ResourceRecord r = repo_->get_resource(id, ctx.actor);
    auto if_match = ctx.request.header("if-match");
    if (!if_match) throw Error(errc::invalid_argument, "updates need an If-Match header with the current version");
    std::string tag = trim(*if_match);
    if (tag.size() >= 2 && tag.front() == '"' && tag.back() == '"') tag = tag.substr(1, tag.size() - 2);
    const std::uint64_t expected = [&] {
      std::uint64_t v = 0;
      const auto [end, ec] = std::from_chars(tag.data(), tag.data() + tag.size(), v);
      if (ec != std::errc() || end != tag.data() + tag.size()) throw Error(errc::invalid_argument, "If-Match must be a version number");
      return v;
    }();
    Json body = parse_body(ctx.request);
    std::optional<ResourceId> indexed;
    if (is_template_kind(r.resourceType)) {
      check_template(body, id);
    } else if (r.resourceType == ResourceType::instance) {
      const ResourceId old_template = instance_from_json(r.payload).templateId;
      indexed = check_instance(body, ctx.actor).templateId;
      if (old_template != *indexed) reindex(old_template);
    } else if (r.resourceType == ResourceType::folder) {
      r.name = body_string(body, "name");
      r.description = body_string(body, "description", false);
      body = Json::object();
    } else if (r.resourceType == ResourceType::receipt) {
      throw Error(errc::permission_denied, "receipts are immutable");
    }
    r.payload = std::move(body);
    ResourceRecord stored = repo_->put_resource(std::move(r), expected, ctx.actor);
    if (indexed) reindex(*indexed);
    return record_response(200, stored);
  });

  add("DELETE", "/resources/{id}", "Delete a resource", [this](Context& ctx) {
    const ResourceId id = id_from(ctx.params[0]);
    const ResourceRecord r = repo_->get_resource(id, ctx.actor);
    repo_->delete_resource(id, ctx.actor);
    if (r.resourceType == ResourceType::instance) reindex(instance_from_json(r.payload).templateId);
    return json_response(200, Json{{"deleted", id.str()}});
  });

  add("POST", "/resources/{id}/move", "Move a resource to another folder", [this](Context& ctx) {
    const Json body = parse_body(ctx.request);
    return record_response(200, repo_->move_resource(id_from(ctx.params[0]), id_from(body_string(body, "folder")), ctx.actor));
  });

  add("PUT", "/resources/{id}/permissions", "Replace the access-control list", [this](Context& ctx) {
    const Json body = parse_body(ctx.request);
    const Json& acl = body.is_object() && body.contains("acl") ? body["acl"] : body;
    return record_response(200, repo_->set_permissions(id_from(ctx.params[0]), acl_from_json(acl, "/acl"), ctx.actor));
  });

  add("GET", "/folders/{id}/children", "List readable children, folders first", [this](Context& ctx) {
    return json_response(200, Json{{"children", records_json(repo_->list_children(id_from(ctx.params[0]), ctx.actor))}});
  });

  add("GET", "/search", "Keyword and faceted search", [this](Context& ctx) {
    SearchQuery q;
    if (auto text = ctx.request.param("q"); text && !text->empty()) q.text = *text;
    if (auto type = ctx.request.param("type"); type && !type->empty()) {
      q.resourceType = resource_type_from_string(*type);
      if (!q.resourceType) throw Error(errc::invalid_query, "unknown resource type '" + *type + "'");
    }
    if (auto term = ctx.request.param("annotatedWith"); term && !term->empty()) q.annotatedWith = *term;
    if (auto folder = ctx.request.param("folder"); folder && !folder->empty()) q.folder = id_from(*folder);
    return json_response(200, Json{{"results", records_json(repo_->search(q, ctx.actor))}});
  });

  add("POST", "/templates/{id}/validate", "Validate an instance against a template", [this](Context& ctx) {
    const ResourceId id = id_from(ctx.params[0]);
    repo_->get_resource(id, ctx.actor);
    const ResolvedTemplate rt = resolve(id);
    const MetadataInstance m = instance_from_json(parse_body(ctx.request));
    if (m.templateId != id)
      throw Error(errc::template_mismatch, "instance is typed with template " + m.templateId.str(), "/@type");
    return HttpResponse{200, "application/json", validation_body(validate(rt, m, terminology_->membership_oracle())), {}};
  });

  add("GET", "/templates/{id}/schema", "Compiled JSON Schema", [this](Context& ctx) {
    const ResourceId id = id_from(ctx.params[0]);
    repo_->get_resource(id, ctx.actor);
    return HttpResponse{200, "application/schema+json", compile(resolve(id)).schemaDoc, {}};
  });

  add("GET", "/templates/{id}/resolved", "Template with references inlined", [this](Context& ctx) {
    const ResourceId id = id_from(ctx.params[0]);
    repo_->get_resource(id, ctx.actor);
    return HttpResponse{200, "application/json", serialize_template(resolve(id).tree()), {}};
  });

  add("GET", "/instances/{id}", "Instance as JSON-LD (format=jsonld) or N-Triples (format=ntriples)", [this](Context& ctx) {
    const ResourceRecord r = repo_->get_resource(id_from(ctx.params[0]), ctx.actor);
    if (r.resourceType != ResourceType::instance) throw Error(errc::not_found, "not an instance");
    const std::string format = ctx.request.param("format").value_or("jsonld");
    const MetadataInstance m = instance_from_json(r.payload);
    if (format == "jsonld") return HttpResponse{200, "application/ld+json", serialize_instance(m), {}};
    if (format == "ntriples") return HttpResponse{200, "application/n-triples", export_ntriples(resolve(m.templateId), m), {}};
    throw Error(errc::invalid_argument, "format must be jsonld or ntriples");
  });

  add("GET", "/instances/{id}/receipts", "Submission receipts of an instance", [this](Context& ctx) {
    const ResourceId id = id_from(ctx.params[0]);
    repo_->get_resource(id, ctx.actor);
    return json_response(200, Json{{"receipts", records_json(repo_->receipts_of(id))}});
  });

  add("POST", "/instances/{id}/submit", "Submit an instance to a configured target", [this](Context& ctx) {
    const ResourceId id = id_from(ctx.params[0]);
    const ResourceRecord r = repo_->get_resource(id, ctx.actor);
    if (r.resourceType != ResourceType::instance) throw Error(errc::not_found, "not an instance");
    const Json body = parse_body(ctx.request);
    const std::string name = body_string(body, "target");
    auto target = std::find_if(config_.targets.begin(), config_.targets.end(), [&](const SubmissionTarget& t) { return t.name == name; });
    if (target == config_.targets.end()) throw Error(errc::unknown_target, "no submission target '" + name + "'", "/target");
    const MetadataInstance m = instance_from_json(r.payload);
    const auto receipt = submit(*target, resolve(m.templateId), m, id, ctx.actor, *repo_, terminology_->membership_oracle(),
                                body_bool(body, "force"), config_.submissionTimeout);
    return json_response(201, receipt_to_json(receipt));
  });

  add("POST", "/recommend", "Ranked value suggestions for a field", [this](Context& ctx) {
    const Json body = parse_body(ctx.request);
    const ResourceId templateId = id_from(body_string(body, "templateId"));
    repo_->get_resource(templateId, ctx.actor);
    const ResolvedTemplate rt = resolve(templateId);
    const std::string target = body_string(body, "targetPath");
    std::vector<ContextPair> context;
    if (body.contains("context")) {
      if (!body["context"].is_array()) throw Error(errc::invalid_argument, "context must be an array", "/context");
      for (std::size_t i = 0; i < body["context"].size(); ++i) {
        const Json& c = body["context"][i];
        const std::string at = json_pointer_append("/context", i);
        if (!c.is_object() || !c.contains("path") || !c["path"].is_string() || !c.contains("value") || !c["value"].is_string())
          throw Error(errc::invalid_argument, "context entries are {path, value} strings", at);
        context.push_back(context_pair(&rt.tree(), c["path"].get<std::string>(), c["value"].get<std::string>()));
      }
    }
    const auto k = body_count(body, "k", 5);
    const auto min_support = body_count(body, "minSupport", 1);
    return HttpResponse{200, "application/json", suggestions_body(index_.suggest(templateId, target, context, k, min_support)), {}};
  });

  add("GET", "/terminology/search", "Ranked ontology term lookup", [this](Context& ctx) {
    const auto limit = ctx.request.param("limit") ? positive_integer(*ctx.request.param("limit"), "limit") : 10;
    auto source = ctx.request.param("source");
    if (source && source->empty()) source.reset();
    const auto result = terminology_->search_terms(ctx.request.param("q").value_or(""), source, limit);
    Json terms = Json::array();
    for (const auto& t : result.terms) terms.push_back(ontology_term_to_json(t));
    return json_response(200, Json{{"terms", terms}, {"degraded", result.degraded}});
  });

  add("GET", "/terminology/branch", "Descendants of an ontology term", [this](Context& ctx) {
    const auto source = ctx.request.param("source");
    const auto root = ctx.request.param("root");
    if (!source || !root) throw Error(errc::invalid_argument, "source and root are required");
    const std::string include = ctx.request.param("includeRoot").value_or("false");
    if (include != "true" && include != "false") throw Error(errc::invalid_argument, "includeRoot must be true or false");
    const auto iris = terminology_->expand_branch(*source, *root, include == "true");
    return json_response(200, Json{{"iris", Json(std::vector<std::string>(iris.begin(), iris.end()))}});
  });

  add("POST", "/terminology/provisional-terms", "Mint a provisional term with SKOS mappings", [this](Context& ctx) {
    const Json body = parse_body(ctx.request);
    std::vector<SkosMapping> mappings;
    if (body.contains("mappings")) {
      if (!body["mappings"].is_array()) throw Error(errc::invalid_argument, "mappings must be an array", "/mappings");
      for (std::size_t i = 0; i < body["mappings"].size(); ++i) {
        const std::string at = json_pointer_append("/mappings", i);
        const Json& m = body["mappings"][i];
        auto relation = skos_relation_from_string(body_string(m, "relation"));
        if (!relation) throw Error(errc::invalid_argument, "relation must be a SKOS mapping relation", at + "/relation");
        mappings.push_back({*relation, body_string(m, "targetIri")});
      }
    }
    const auto term = terminology_->create_provisional_term(body_string(body, "label"), std::move(mappings),
                                                            body_bool(body, "force"), ctx.actor);
    return record_response(201, *repo_->find(term.id));
  });

  add("POST", "/groups", "Create a group", [this](Context& ctx) {
    const Json body = parse_body(ctx.request);
    return json_response(201, group_to_json(repo_->create_group(body_string(body, "name"), ctx.actor)));
  });

  add("GET", "/groups/{id}", "Read a group (members only)", [this](Context& ctx) {
    auto g = repo_->group(id_from(ctx.params[0]));
    if (!g) throw Error(errc::not_found, "no group " + ctx.params[0]);
    if (std::find(g->members.begin(), g->members.end(), ctx.actor) == g->members.end())
      throw Error(errc::permission_denied, "not a member of the group");
    return json_response(200, group_to_json(*g));
  });

  add("PUT", "/groups/{id}/members", "Replace group membership (group owner only)", [this](Context& ctx) {
    const Json body = parse_body(ctx.request);
    const Json& list = body.is_object() && body.contains("members") ? body["members"] : body;
    if (!list.is_array()) throw Error(errc::invalid_argument, "members must be an array", "/members");
    std::vector<ResourceId> members;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!list[i].is_string() || !is_resource_id(list[i].get<std::string>()))
        throw Error(errc::invalid_argument, "members are user ids", json_pointer_append("/members", i));
      members.push_back(ResourceId::parse(list[i].get<std::string>()));
    }
    return json_response(200, group_to_json(repo_->set_members(id_from(ctx.params[0]), members, ctx.actor)));
  });

  add("GET", "/users/me", "The authenticated user", [this](Context& ctx) {
    const auto u = repo_->user(ctx.actor);
    return json_response(200, Json{{"id", u->id.str()}, {"name", u->name}, {"homeFolder", u->homeFolder.str()},
                                   {"rootFolder", Repository::root_folder().str()}});
  });

  add("GET", "/openapi.json", "This description", [this](Context&) { return json_response(200, openapi()); }, false);
}

// ---- HTTP adapter ------------------------------------------------------

void ServiceServer::install(httplib::Server& server) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    for (const auto& [k, v] : req.headers) {
      std::string name = k;
      std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
      r.headers.emplace(std::move(name), v);
    }
    r.body = req.body;
    const HttpResponse out = service_.dispatch(r);
    res.status = out.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Authorization, Content-Type, If-Match");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, DELETE, OPTIONS");
    res.set_header("Access-Control-Expose-Headers", "ETag");
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    if (!out.body.empty()) res.set_content(out.body, out.contentType);
  };
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.Put(".*", handler);
  server.Delete(".*", handler);
  server.Patch(".*", handler);
  server.Options(".*", handler);
}

}  // namespace metaforge
