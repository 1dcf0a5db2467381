#pragma once

#include "metaforge/compiler.hpp"
#include "metaforge/error.hpp"
#include "metaforge/jsonutil.hpp"
#include "metaforge/mock_servers.hpp"
#include "metaforge/recommender.hpp"
#include "metaforge/repository.hpp"
#include "metaforge/submission.hpp"
#include "metaforge/terminology.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace metaforge {

struct HttpRequest {
  std::string method;
  std::string path;  // without the query string
  std::multimap<std::string, std::string> query;
  std::map<std::string, std::string> headers;  // lowercase names
  std::string body;

  std::optional<std::string> param(const std::string& key) const;
  std::optional<std::string> header(const std::string& name) const;
};

struct HttpResponse {
  int status = 200;
  std::string contentType = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;
};

/// HTTP status for a module error code.
int http_status_for(std::string_view code);

/// `{"error", "message", "path"?}` plus the attachment of a DetailedError.
Json error_body(const Error& e);

// Bodies shared by the REST service and the CLI, so both print the same bytes.
std::string validation_body(const ValidationReport& report);
std::string suggestions_body(const std::vector<Suggestion>& suggestions);

struct ServiceConfig {
  std::filesystem::path dataDir = "data";
  TerminologyConfig terminology;
  std::vector<SubmissionTarget> targets;
  std::chrono::milliseconds submissionTimeout = external_timeout;

  /// METAFORGE_DATA_DIR, the terminology variables and the target list.
  static ServiceConfig from_env();
};

/// All REST endpoints under /api/v1, as a pure request -> response
/// function. Safe to call from many threads at once.
class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  HttpResponse dispatch(const HttpRequest& request);

  Repository& repository() { return *repo_; }
  TerminologyService& terminology() { return *terminology_; }
  const LiveIndex& index() const { return index_; }

  /// Resolves a stored template against the repository.
  ResolvedTemplate resolve(const ResourceId& templateId) const;

  /// OpenAPI 3.0 description generated from the route table.
  Json openapi() const;

  struct Route;

 private:
  struct Context;
  void register_routes();
  void reindex(const ResourceId& templateId);

  ServiceConfig config_;
  std::unique_ptr<Repository> repo_;
  std::shared_ptr<RepositoryTermStore> store_;
  std::unique_ptr<TerminologyService> terminology_;
  LiveIndex index_;
  std::vector<Route> routes_;
};

/// Serves a Service over HTTP, adding CORS headers.
class ServiceServer : public LoopbackServer {
 public:
  explicit ServiceServer(Service& service) : service_(service) {}
  ~ServiceServer() override { stop(); }

 protected:
  void install(httplib::Server& server) override;

 private:
  Service& service_;
};

}  // namespace metaforge
