// Stand-in remote services for local runs of the REST service.
//
//   metaforge-mock terminology --taxonomy fixtures/taxonomy.json [--port N] [--apikey K]
//   metaforge-mock validator [--mode accept|malformed|failing]
//   metaforge-mock submission [--status 201]

#include "metaforge/error.hpp"
#include "metaforge/mock_servers.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <memory>

using namespace metaforge;

int main(int argc, char** argv) {
  CLI::App app{"metaforge-mock: terminology, validator and submission stand-ins"};
  app.require_subcommand(1);
  int port = 0;
  std::string host = "127.0.0.1";
  app.add_option("--port", port, "Port (0 picks a free one)");
  app.add_option("--host", host, "Listen address");

  auto* terminology = app.add_subcommand("terminology", "Ontology search and descendants");
  std::string taxonomy, apikey;
  std::size_t page_limit = 4;
  terminology->add_option("--taxonomy", taxonomy, "Taxonomy fixture")->required();
  terminology->add_option("--apikey", apikey, "Require this API key");
  terminology->add_option("--page-limit", page_limit, "Records per page");

  auto* validator = app.add_subcommand("validator", "External validator");
  std::string mode = "accept";
  validator->add_option("--mode", mode, "Response mode")->check(CLI::IsMember({"accept", "malformed", "failing"}));

  auto* submission = app.add_subcommand("submission", "Submission endpoint");
  int status = 201;
  submission->add_option("--status", status, "HTTP status of every answer");

  CLI11_PARSE(app, argc, argv);

  try {
    std::unique_ptr<LoopbackServer> server;
    if (terminology->parsed()) {
      server = std::make_unique<MockTerminologyServer>(Taxonomy::load(taxonomy), apikey, page_limit);
    } else if (validator->parsed()) {
      auto v = std::make_unique<MockValidatorServer>();
      v->set_mode(mode == "malformed"  ? MockValidatorServer::Mode::malformed
                  : mode == "failing" ? MockValidatorServer::Mode::failing
                                      : MockValidatorServer::Mode::accept);
      server = std::move(v);
    } else {
      auto s = std::make_unique<MockSubmissionServer>();
      s->set_status(status);
      server = std::move(s);
    }
    server->start(port, host);
    std::cout << server->url() << std::endl;
    server->wait();
  } catch (const Error& e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return 3;
  }
  return 0;
}
