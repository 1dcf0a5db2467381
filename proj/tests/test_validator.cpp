#include "fixtures.hpp"
#include "oracles.hpp"

#include "metaforge/compiler.hpp"
#include "metaforge/composition.hpp"
#include "metaforge/instance_io.hpp"
#include "metaforge/template_io.hpp"
#include "metaforge/terminology.hpp"

#include <doctest.h>

using namespace metaforge;
using namespace metaforge::testing;

namespace {

ResolvedTemplate load(const std::string& name) {
  return resolve_composition(parse_template(read_text(fixture(name))), [](const ResourceId&) { return std::nullopt; });
}

MembershipOracle local_oracle() {
  auto service = std::make_shared<TerminologyService>(TerminologyConfig{}, std::make_shared<InMemoryTermStore>());
  return [service](const ValueConstraintSet& c, std::string_view iri) { return service->is_member(c, iri); };
}

}  // namespace

TEST_SUITE("validator") {
  TEST_CASE("all 64 three-field instances match the brute-force classification") {
    const ResolvedTemplate rt = load("validation-template.json");
    const Validator validator(rt);
    const auto oracle = local_oracle();
    for (const auto& c : all_three_field_cases()) {
      const Json doc = three_field_instance(c);
      CAPTURE(doc.dump());
      const ValidationReport report = validator.validate(instance_from_json(doc), oracle);
      const auto expected = three_field_expected(c);
      CHECK(report.valid == expected.empty());
      std::vector<std::pair<std::string, std::string>> got;
      for (const auto& e : report.errors) got.emplace_back(e.path, std::string(to_string(e.code)));
      CHECK(got == expected);
    }
  }

  TEST_CASE("a number in a term field is a type mismatch") {
    const ResolvedTemplate rt = load("five-types-template.json");
    const auto report = validate(rt, parse_instance(read_text(fixture("numeric-in-term.json"))), local_oracle());
    CHECK_FALSE(report.valid);
    REQUIRE(report.errors.size() == 1);
    CHECK(report.errors[0].path == "/organ");
    CHECK(report.errors[0].code == ErrorCode::type_mismatch);
  }

  TEST_CASE("the five-type instance is valid, and unchecked terms become warnings") {
    const ResolvedTemplate rt = load("five-types-template.json");
    const auto m = parse_instance(read_text(fixture("five-types-valid.json")));
    CHECK(validate(rt, m, local_oracle()).valid);
    const auto offline = validate(rt, m, {});
    CHECK(offline.valid);
    REQUIRE(offline.warnings.size() == 1);
    CHECK(offline.warnings[0].path == "/organ");
  }

  TEST_CASE("cardinality, arrays, unknown fields and dates") {
    const std::string id = R"("id":"6f1c2a40-8d3e-4b7a-9c21-5e0f4a7b4001","kind":"template","name":"T")";
    const ResolvedTemplate rt(parse_template("{" + id + R"(,"children":[
      {"name":"tags","fieldType":"text","cardinality":{"min":1,"max":2}},
      {"name":"when","fieldType":"date"},
      {"name":"dose","fieldType":"number","constraints":{"decimalPlaces":1}}]})"));
    auto codes = [&](const std::string& body) {
      const auto r = validate(rt, parse_instance(R"({"@id":"https://example.org/i","@type":"urn:metaforge:template:6f1c2a40-8d3e-4b7a-9c21-5e0f4a7b4001",)" + body + "}"), {});
      std::vector<std::string> out;
      for (const auto& e : r.errors) out.push_back(std::string(to_string(e.code)) + "@" + e.path);
      return out;
    };
    CHECK(codes(R"("tags":["a","b"])").empty());
    CHECK(codes(R"("tags":["a","b","c"])") == std::vector<std::string>{"CARDINALITY@/tags"});
    CHECK(codes(R"("tags":"a")") == std::vector<std::string>{"TYPE_MISMATCH@/tags"});
    CHECK(codes(R"("tags":[],"x":1)") == std::vector<std::string>{"CARDINALITY@/tags", "UNKNOWN_FIELD@/x"});
    CHECK(codes(R"("when":"2023-02-29")") == std::vector<std::string>{"OUT_OF_RANGE@/when"});
    CHECK(codes(R"("when":"29/02/2024")") == std::vector<std::string>{"PATTERN_MISMATCH@/when"});
    CHECK(codes(R"("dose":1.25)") == std::vector<std::string>{"OUT_OF_RANGE@/dose"});
    CHECK(codes(R"("dose":1.2)").empty());
  }

  TEST_CASE("compilation is deterministic and targets draft-07") {
    const ResolvedTemplate rt = load("five-types-template.json");
    const auto a = compile(rt);
    const auto b = compile(load("five-types-template.json"));
    CHECK(a.schemaDoc == b.schemaDoc);
    const Json schema = parse_json(a.schemaDoc);
    CHECK(schema["$schema"] == "http://json-schema.org/draft-07/schema#");
    CHECK(schema["required"] == Json::array({"@id", "@type", "title", "organ"}));
    CHECK(a.termFields.count("organ") == 1);
    REQUIRE(a.contextMap.size() == 5);
    CHECK(a.contextMap[0] == std::pair<std::string, std::string>{"title", "http://purl.org/dc/terms/title"});
  }
}
