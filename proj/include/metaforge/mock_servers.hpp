#pragma once

#include "metaforge/jsonutil.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace metaforge {

/// An HTTP server on 127.0.0.1 running in a background thread. Used as a
/// stand-in for the remote services in tests and by `metaforge-mock`.
class LoopbackServer {
 public:
  LoopbackServer();
  /// Subclasses call stop() in their own destructor, while their handlers
  /// can still run safely.
  virtual ~LoopbackServer();
  LoopbackServer(const LoopbackServer&) = delete;
  LoopbackServer& operator=(const LoopbackServer&) = delete;

  /// port 0 picks a free port. Returns once the server accepts requests.
  void start(int port = 0, const std::string& host = "127.0.0.1");
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();

  int port() const { return port_; }
  std::string url() const;
  std::size_t request_count() const { return requests_.load(); }

 protected:
  virtual void install(httplib::Server& server) = 0;
  void count_request() { ++requests_; }

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::string host_ = "127.0.0.1";
  std::atomic<std::size_t> requests_{0};
};

struct TaxonomyTerm {
  std::string iri;
  std::string label;
  std::vector<std::string> synonyms;
  std::vector<std::string> parents;
  std::string type = "class";
};

/// A small ontology: {"ontology": acronym, "terms": [{iri, label,
/// synonyms?, parents?, type?}]}.
struct Taxonomy {
  std::string ontology;
  std::vector<TaxonomyTerm> terms;

  static Taxonomy load(const std::filesystem::path& file);
  static Taxonomy from_json(const Json& doc);

  const TaxonomyTerm* find(std::string_view iri) const;
  /// Transitive descendants, excluding iri itself unless reachable by a cycle.
  std::set<std::string> descendants(std::string_view iri) const;
};

/// Terminology protocol over a Taxonomy. Pages hold at most `page_limit`
/// records regardless of the requested pagesize, so clients must follow
/// nextPage.
class MockTerminologyServer : public LoopbackServer {
 public:
  explicit MockTerminologyServer(Taxonomy taxonomy, std::string api_key = "", std::size_t page_limit = 4);
  ~MockTerminologyServer() override { stop(); }

  /// While unavailable every request gets 503.
  void set_available(bool available) { available_ = available; }

 protected:
  void install(httplib::Server& server) override;

 private:
  Taxonomy taxonomy_;
  std::string api_key_;
  std::size_t page_limit_;
  std::atomic<bool> available_{true};
};

/// External validator protocol: POST /validate with an instance body.
class MockValidatorServer : public LoopbackServer {
 public:
  enum class Mode { accept, scripted, malformed, failing };

  ~MockValidatorServer() override { stop(); }

  void set_mode(Mode mode);
  /// Body returned verbatim in scripted mode.
  void set_response(Json body);
  std::string last_body() const;
  std::string last_content_type() const;

 protected:
  void install(httplib::Server& server) override;

 private:
  mutable std::mutex mutex_;
  Mode mode_ = Mode::accept;
  Json response_ = Json::object();
  std::string last_body_;
  std::string last_content_type_;
};

/// Submission target: any POST gets `status` and {"id": "<prefix><n>"}.
class MockSubmissionServer : public LoopbackServer {
 public:
  ~MockSubmissionServer() override { stop(); }
  void set_status(int status);
  void set_id_prefix(std::string prefix);
  std::string last_authorization() const;
  std::string last_body() const;

 protected:
  void install(httplib::Server& server) override;

 private:
  mutable std::mutex mutex_;
  int status_ = 201;
  std::string prefix_ = "MOCK-";
  std::size_t counter_ = 0;
  std::string last_authorization_;
  std::string last_body_;
};

}  // namespace metaforge
