#include "metaforge/mock_servers.hpp"

#include "metaforge/error.hpp"
#include "metaforge/text.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace metaforge {

LoopbackServer::LoopbackServer() = default;

LoopbackServer::~LoopbackServer() { stop(); }

void LoopbackServer::start(int port, const std::string& host) {
  if (server_) return;
  host_ = host;
  server_ = std::make_unique<httplib::Server>();
  server_->set_pre_routing_handler([this](const httplib::Request&, httplib::Response&) {
    count_request();
    return httplib::Server::HandlerResponse::Unhandled;
  });
  install(*server_);
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ <= 0) {
    server_.reset();
    throw Error(errc::io_error, "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([server = server_.get()] { server->listen_after_bind(); });
  server_->wait_until_ready();
}

void LoopbackServer::stop() {
  if (!server_) return;
  server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

void LoopbackServer::wait() {
  if (thread_.joinable()) thread_.join();
}

std::string LoopbackServer::url() const {
  const std::string host = host_ == "0.0.0.0" ? "127.0.0.1" : host_;
  return "http://" + host + ":" + std::to_string(port_);
}

// ---- taxonomy ----------------------------------------------------------

Taxonomy Taxonomy::from_json(const Json& doc) {
  Taxonomy t;
  if (!doc.is_object() || !doc.contains("ontology") || !doc.contains("terms") || !doc["terms"].is_array())
    throw Error(errc::model_violation, "taxonomy needs 'ontology' and 'terms'");
  t.ontology = doc["ontology"].get<std::string>();
  for (const auto& item : doc["terms"]) {
    TaxonomyTerm term;
    term.iri = item.at("iri").get<std::string>();
    term.label = item.at("label").get<std::string>();
    if (item.contains("synonyms")) term.synonyms = item["synonyms"].get<std::vector<std::string>>();
    if (item.contains("parents")) term.parents = item["parents"].get<std::vector<std::string>>();
    if (item.contains("type")) term.type = item["type"].get<std::string>();
    t.terms.push_back(std::move(term));
  }
  return t;
}

Taxonomy Taxonomy::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot read " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return from_json(parse_json(text.str()));
}

const TaxonomyTerm* Taxonomy::find(std::string_view iri) const {
  for (const auto& t : terms)
    if (t.iri == iri) return &t;
  return nullptr;
}

std::set<std::string> Taxonomy::descendants(std::string_view iri) const {
  std::set<std::string> out;
  std::vector<std::string> frontier{std::string(iri)};
  while (!frontier.empty()) {
    const std::string parent = frontier.back();
    frontier.pop_back();
    for (const auto& t : terms)
      if (std::find(t.parents.begin(), t.parents.end(), parent) != t.parents.end() && out.insert(t.iri).second)
        frontier.push_back(t.iri);
  }
  return out;
}

// ---- terminology -------------------------------------------------------

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(dump_canonical(body), "application/json");
}

std::size_t param_size(const httplib::Request& req, const char* key, std::size_t fallback) {
  if (!req.has_param(key)) return fallback;
  try {
    const long v = std::stol(req.get_param_value(key));
    return v > 0 ? static_cast<std::size_t>(v) : fallback;
  } catch (const std::exception&) {
    return fallback;
  }
}

std::string decode_component(const std::string& text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%' && i + 2 < text.size() && std::isxdigit(static_cast<unsigned char>(text[i + 1])) &&
        std::isxdigit(static_cast<unsigned char>(text[i + 2]))) {
      out.push_back(static_cast<char>(std::stoi(text.substr(i + 1, 2), nullptr, 16)));
      i += 2;
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

Json term_record(const TaxonomyTerm& t, const std::string& ontology) {
  Json r = Json::object();
  r["@id"] = t.iri;
  r["prefLabel"] = t.label;
  r["synonym"] = t.synonyms;
  r["ontology"] = ontology;
  r["type"] = t.type;
  return r;
}

}  // namespace

MockTerminologyServer::MockTerminologyServer(Taxonomy taxonomy, std::string api_key, std::size_t page_limit)
    : taxonomy_(std::move(taxonomy)), api_key_(std::move(api_key)), page_limit_(std::max<std::size_t>(page_limit, 1)) {}

void MockTerminologyServer::install(httplib::Server& server) {
  auto guard = [this](const httplib::Request& req, httplib::Response& res) {
    if (!available_) {
      send_json(res, 503, Json{{"error", "unavailable"}});
      return false;
    }
    if (!api_key_.empty() && req.get_header_value("Authorization") != "apikey token=" + api_key_) {
      send_json(res, 401, Json{{"error", "unauthorized"}});
      return false;
    }
    return true;
  };

  // Serves one page of `matches`, linking the next page by full URL.
  auto page = [this](const httplib::Request& req, httplib::Response& res, const std::vector<const TaxonomyTerm*>& matches,
                     const std::string& path, std::vector<std::pair<std::string, std::string>> params) {
    const std::size_t size = std::min(param_size(req, "pagesize", 50), page_limit_);
    const std::size_t number = param_size(req, "page", 1);
    const std::size_t begin = std::min(matches.size(), (number - 1) * size);
    const std::size_t end = std::min(matches.size(), begin + size);
    Json body = Json::object();
    body["page"] = number;
    body["pageCount"] = matches.empty() ? 1 : (matches.size() + size - 1) / size;
    body["collection"] = Json::array();
    for (std::size_t i = begin; i < end; ++i) body["collection"].push_back(term_record(*matches[i], taxonomy_.ontology));
    if (end < matches.size()) {
      params.emplace_back("pagesize", std::to_string(size));
      params.emplace_back("page", std::to_string(number + 1));
      std::string next = url() + path;
      char sep = '?';
      for (const auto& [k, v] : params) {
        next += sep + percent_encode(k) + "=" + percent_encode(v);
        sep = '&';
      }
      body["nextPage"] = next;
    } else {
      body["nextPage"] = nullptr;
    }
    send_json(res, 200, body);
  };

  server.Get("/search", [this, guard, page](const httplib::Request& req, httplib::Response& res) {
    if (!guard(req, res)) return;
    const std::string q = casefold(trim(req.get_param_value("q")));
    const std::string ontologies = req.get_param_value("ontologies");
    std::vector<const TaxonomyTerm*> matches;
    const bool ontology_ok = ontologies.empty() || ("," + ontologies + ",").find("," + taxonomy_.ontology + ",") != std::string::npos;
    if (!q.empty() && ontology_ok) {
      for (const auto& t : taxonomy_.terms) {
        bool hit = casefold(t.label).find(q) != std::string::npos;
        for (const auto& s : t.synonyms) hit = hit || casefold(s).find(q) != std::string::npos;
        if (hit) matches.push_back(&t);
      }
    }
    std::vector<std::pair<std::string, std::string>> params{{"q", req.get_param_value("q")}};
    if (!ontologies.empty()) params.emplace_back("ontologies", ontologies);
    page(req, res, matches, "/search", params);
  });

  server.Get(R"(/ontologies/([^/]+)/classes/(.+)/descendants)",
             [this, guard, page](const httplib::Request& req, httplib::Response& res) {
               if (!guard(req, res)) return;
               const std::string acronym = req.matches[1];
               std::string iri = req.matches[2];
               if (iri.find('%') != std::string::npos) iri = decode_component(iri);
               if (acronym != taxonomy_.ontology || taxonomy_.find(iri) == nullptr) {
                 send_json(res, 404, Json{{"error", "not found"}});
                 return;
               }
               std::vector<const TaxonomyTerm*> matches;
               const auto below = taxonomy_.descendants(iri);
               for (const auto& t : taxonomy_.terms)
                 if (below.contains(t.iri)) matches.push_back(&t);
               page(req, res, matches,
                    "/ontologies/" + percent_encode(acronym) + "/classes/" + percent_encode(iri) + "/descendants", {});
             });
}

// ---- validator ---------------------------------------------------------

void MockValidatorServer::set_mode(Mode mode) {
  std::lock_guard lock(mutex_);
  mode_ = mode;
}

void MockValidatorServer::set_response(Json body) {
  std::lock_guard lock(mutex_);
  mode_ = Mode::scripted;
  response_ = std::move(body);
}

std::string MockValidatorServer::last_body() const {
  std::lock_guard lock(mutex_);
  return last_body_;
}

std::string MockValidatorServer::last_content_type() const {
  std::lock_guard lock(mutex_);
  return last_content_type_;
}

void MockValidatorServer::install(httplib::Server& server) {
  server.Post("/validate", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mutex_);
    last_body_ = req.body;
    last_content_type_ = req.get_header_value("Content-Type");
    switch (mode_) {
      case Mode::accept: send_json(res, 200, Json{{"valid", true}, {"messages", Json::array()}}); break;
      case Mode::scripted: send_json(res, 200, response_); break;
      case Mode::malformed:
        res.status = 200;
        res.set_content("<html>not json</html>", "text/html");
        break;
      case Mode::failing: send_json(res, 500, Json{{"error", "internal"}}); break;
    }
  });
}

// ---- submission --------------------------------------------------------

void MockSubmissionServer::set_status(int status) {
  std::lock_guard lock(mutex_);
  status_ = status;
}

void MockSubmissionServer::set_id_prefix(std::string prefix) {
  std::lock_guard lock(mutex_);
  prefix_ = std::move(prefix);
}

std::string MockSubmissionServer::last_authorization() const {
  std::lock_guard lock(mutex_);
  return last_authorization_;
}

std::string MockSubmissionServer::last_body() const {
  std::lock_guard lock(mutex_);
  return last_body_;
}

void MockSubmissionServer::install(httplib::Server& server) {
  server.Post(R"(/.*)", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mutex_);
    last_authorization_ = req.get_header_value("Authorization");
    last_body_ = req.body;
    if (status_ >= 200 && status_ < 300) {
      send_json(res, status_, Json{{"id", prefix_ + std::to_string(++counter_)}});
    } else {
      send_json(res, status_, Json{{"error", "rejected"}});
    }
  });
}

}  // namespace metaforge
