#include "fixtures.hpp"

#include "metaforge/composition.hpp"
#include "metaforge/error.hpp"
#include "metaforge/instance_io.hpp"
#include "metaforge/mock_servers.hpp"
#include "metaforge/submission.hpp"
#include "metaforge/template_io.hpp"

#include <doctest.h>

using namespace metaforge;
using namespace metaforge::testing;

namespace {

struct Pipeline {
  TempDir dir;
  Repository repo{dir.path};
  User user = repo.create_user("submitter");
  MockSubmissionServer endpoint;
  MockValidatorServer validator;
  ResolvedTemplate rt{parse_template(read_text(fixture("tissue-template.json")))};
  ResourceId templateRecord, instanceRecord;
  MetadataInstance instance = parse_instance(read_text(fixture("corpus/sample-1.json")));
  ScopedEnv key{"MF_TEST_SUBMIT_KEY", std::string("s3cret")};

  Pipeline() {
    endpoint.start();
    validator.start();
    ResourceRecord t;
    t.id = rt.id();
    t.resourceType = ResourceType::template_;
    t.parentFolder = user.homeFolder;
    t.payload = template_to_json(rt.tree());
    templateRecord = repo.put_resource(t, std::nullopt, user.id).id;
    ResourceRecord i;
    i.id = ResourceId::generate();
    i.resourceType = ResourceType::instance;
    i.parentFolder = user.homeFolder;
    i.payload = instance_to_json(instance);
    instanceRecord = repo.put_resource(i, std::nullopt, user.id).id;
  }

  SubmissionTarget target(bool with_validator = true) const {
    SubmissionTarget t;
    t.name = "mock";
    t.endpointUrl = endpoint.url() + "/submit";
    t.apiKeyEnvVar = "MF_TEST_SUBMIT_KEY";
    if (with_validator) t.externalValidatorUrl = validator.url() + "/validate";
    return t;
  }

  SubmissionReceipt run(const SubmissionTarget& t, bool force = false, const MetadataInstance* m = nullptr) {
    return submit(t, rt, m ? *m : instance, instanceRecord, user.id, repo, {}, force, std::chrono::seconds(5));
  }
};

}  // namespace

TEST_SUITE("submission") {
  TEST_CASE("a successful submission stores a receipt") {
    Pipeline p;
    const auto receipt = p.run(p.target());
    CHECK(receipt.httpStatus == 201);
    CHECK(receipt.remoteId == std::optional<std::string>("MOCK-1"));
    CHECK(receipt.localValidation);
    CHECK(receipt.externalValidation == std::optional<bool>(true));
    CHECK_FALSE(receipt.forced);
    CHECK(p.endpoint.last_authorization() == "apikey token=s3cret");
    CHECK(parse_json(p.endpoint.last_body()) == instance_to_json(p.instance));
    CHECK(p.validator.last_content_type() == "application/ld+json");
    const auto stored = p.repo.receipts_of(p.instanceRecord);
    REQUIRE(stored.size() == 1);
    CHECK(receipt_from_json(stored[0].payload) == receipt);
    CHECK(stored[0].subject == std::optional<ResourceId>(p.instanceRecord));
  }

  TEST_CASE("failures before the POST leave no receipt") {
    Pipeline p;
    {
      ScopedEnv unset("MF_TEST_SUBMIT_KEY", std::nullopt);
      CHECK_THROWS_WITH_AS(p.run(p.target()), doctest::Contains("MF_TEST_SUBMIT_KEY"), Error);
    }
    p.validator.set_response(Json{{"valid", false}, {"messages", Json::array({Json{{"path", "/tissue"}, {"message", "no"}, {"severity", "error"}}})}});
    try {
      p.run(p.target());
      FAIL("expected rejection by the validator");
    } catch (const DetailedError& e) {
      CHECK(e.code() == "EXTERNAL_VALIDATION_FAILED");
      CHECK(e.details()["valid"] == false);
    }
    p.validator.set_mode(MockValidatorServer::Mode::malformed);
    CHECK_THROWS_AS(p.run(p.target()), Error);
    p.validator.set_mode(MockValidatorServer::Mode::failing);
    try {
      p.run(p.target());
      FAIL("expected VALIDATOR_UNAVAILABLE");
    } catch (const Error& e) {
      CHECK(e.code() == "VALIDATOR_UNAVAILABLE");
    }
    MetadataInstance bad = p.instance;
    bad.values.fields.clear();
    try {
      p.run(p.target(false), false, &bad);
      FAIL("expected VALIDATION_FAILED");
    } catch (const DetailedError& e) {
      CHECK(e.code() == "VALIDATION_FAILED");
      CHECK(e.details()["valid"] == false);
    }
    p.endpoint.stop();
    try {
      p.run(p.target(false));
      FAIL("expected SUBMISSION_UNAVAILABLE");
    } catch (const Error& e) {
      CHECK(e.code() == "SUBMISSION_UNAVAILABLE");
    }
    CHECK(p.repo.receipts_of(p.instanceRecord).empty());
  }

  TEST_CASE("forcing skips failed checks and is recorded") {
    Pipeline p;
    p.validator.set_mode(MockValidatorServer::Mode::failing);
    const auto receipt = p.run(p.target(), true);
    CHECK(receipt.forced);
    CHECK(receipt.httpStatus == 201);
  }

  TEST_CASE("a rejecting endpoint still yields a stored receipt") {
    Pipeline p;
    p.endpoint.set_status(400);
    try {
      p.run(p.target(false));
      FAIL("expected SUBMISSION_REJECTED");
    } catch (const DetailedError& e) {
      CHECK(e.code() == "SUBMISSION_REJECTED");
      CHECK(e.details()["httpStatus"] == 400);
    }
    CHECK(p.repo.receipts_of(p.instanceRecord).size() == 1);
  }

  TEST_CASE("tsv serialization") {
    const ResolvedTemplate rt(parse_template(read_text(fixture("five-types-template.json"))));
    auto m = parse_instance(read_text(fixture("five-types-valid.json")));
    const std::string tsv = serialize_for_target(rt, m, TargetFormat::tsv);
    CHECK(tsv ==
          "title\tsummary\tweight\tcollected\torgan\n"
          "Liver biopsy 17\tNeedle biopsy. Stored at -80 C.\t1.25\t2024-03-05\tliver [http://purl.obolibrary.org/obo/UBERON_0002107]\n");
  }

  TEST_CASE("target configuration") {
    const auto targets = targets_from_json(parse_json(R"({"targets":[{"name":"a","endpointUrl":"http://localhost:1/x",
      "format":"tsv","apiKeyEnvVar":"K"}]})"));
    REQUIRE(targets.size() == 1);
    CHECK(targets[0].format == TargetFormat::tsv);
    CHECK_FALSE(targets[0].externalValidatorUrl.has_value());
    CHECK_THROWS_AS(targets_from_json(parse_json(R"([{"name":"a","endpointUrl":"ftp://x","apiKeyEnvVar":"K"}])")), Error);
  }
}
