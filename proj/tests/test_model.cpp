#include "fixtures.hpp"
#include "generators.hpp"

#include "metaforge/error.hpp"
#include "metaforge/instance_io.hpp"
#include "metaforge/template_io.hpp"
#include "metaforge/text.hpp"

#include <doctest.h>

using namespace metaforge;
using namespace metaforge::testing;

namespace {

std::string error_code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "no error";
}

std::string error_path_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.path();
  }
  return "no error";
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("fixture templates reach a fixpoint after one serialization") {
    for (const char* name : {"tissue-template.json", "five-types-template.json", "validation-template.json",
                             "rdf-flat-template.json", "nested-template.json", "library/site-element.json"}) {
      CAPTURE(name);
      const Template t = parse_template(read_text(fixture(name)));
      const std::string once = serialize_template(t);
      CHECK(parse_template(once) == t);
      CHECK(serialize_template(parse_template(once)) == once);
    }
  }

  TEST_CASE("random templates and instances round-trip") {
    Rng rng(7);
    for (int i = 0; i < 60; ++i) {
      const Json doc = random_template_json(rng);
      const Template t = template_from_json(doc);
      const std::string s1 = serialize_template(t);
      const Template back = parse_template(s1);
      REQUIRE(back == t);
      REQUIRE(serialize_template(back) == s1);

      const MetadataInstance m = instance_from_json(random_instance_json(rng, t));
      const std::string i1 = serialize_instance(m);
      const MetadataInstance m2 = parse_instance(i1);
      REQUIRE(m2 == m);
      REQUIRE(serialize_instance(m2) == i1);
    }
  }

  TEST_CASE("defaults are written out explicitly") {
    const Template t = parse_template(R"({"id":"6f1c2a40-8d3e-4b7a-9c21-5e0f4a7b2001","kind":"template","name":"T",
      "children":[{"name":"a","fieldType":"text","required":true}]})");
    const Json out = template_to_json(t);
    CHECK(out["children"][0]["cardinality"] == Json{{"min", 1}, {"max", 1}});
    CHECK(out["version"] == 0);
    CHECK(out["annotations"] == Json::array());
  }

  TEST_CASE("template violations carry a JSON Pointer") {
    const std::string id = R"("id":"6f1c2a40-8d3e-4b7a-9c21-5e0f4a7b2001","kind":"template")";
    CHECK(error_code_of([] { parse_template("{not json"); }) == "MALFORMED_JSON");
    CHECK(error_path_of([&] { parse_template("{" + id + R"(,"name":""})"); }) == "/name");
    CHECK(error_path_of([&] {
            parse_template("{" + id + R"(,"name":"T","children":[{"name":"a","fieldType":"text"},{"name":"a","fieldType":"date"}]})");
          }) == "/children/1/name");
    CHECK(error_path_of([&] {
            parse_template("{" + id + R"(,"name":"T","children":[{"name":"a","fieldType":"text","constraints":{"pattern":"[a-z]+"}}]})");
          }) == "/children/0/constraints/pattern");
    CHECK(error_path_of([&] {
            parse_template("{" + id + R"(,"name":"T","children":[{"name":"a","fieldType":"term","constraints":{"sources":[]}}]})");
          }) == "/children/0/constraints/sources");
    CHECK(error_path_of([&] {
            parse_template("{" + id + R"(,"name":"T","children":[{"name":"a","fieldType":"number","cardinality":{"min":3,"max":2}}]})");
          }) == "/children/0/cardinality");
    CHECK(error_code_of([&] { parse_template(R"({"id":"not-a-uuid","kind":"template","name":"T"})"); }) == "MODEL_VIOLATION");
    CHECK(error_code_of([&] { parse_template("{" + id + R"(,"name":"T","extra":1})"); }) == "MODEL_VIOLATION");
  }

  TEST_CASE("instance shorthand and typed literals parse to the same model") {
    const std::string head = R"("@id":"https://example.org/x","@type":"urn:metaforge:template:6f1c2a40-8d3e-4b7a-9c21-5e0f4a7b1001")";
    const auto a = parse_instance("{" + head + R"(,"tissue":"liver","n":3})");
    const auto b = parse_instance("{" + head + R"(,"tissue":{"@value":"liver"},"n":{"@value":3,"@type":"xsd:decimal"}})");
    CHECK(a == b);
    CHECK(serialize_instance(a) == serialize_instance(b));
  }

  TEST_CASE("instance documents must name a template") {
    CHECK(error_path_of([] { parse_instance(R"({"@id":"https://example.org/x","@type":"Sample"})"); }) == "/@type");
    CHECK(error_path_of([] { parse_instance(R"({"@type":"urn:metaforge:template:6f1c2a40-8d3e-4b7a-9c21-5e0f4a7b1001"})"); }) ==
          "/@id");
  }

  TEST_CASE("flattening lists leaves with normalized keys") {
    const auto m = parse_instance(read_text(fixture("nested-instance.json")));
    const auto flat = flatten_instance(m);
    REQUIRE(flat.size() == 3);
    CHECK(flat[0].path == "title");
    CHECK(flat[0].valueKey == "nested");
    CHECK(flat[0].display == "Nested");
    CHECK(flat[1].path == "sample/site/organ");
    CHECK(flat[1].valueKey == "http://purl.obolibrary.org/obo/UBERON_0002107");
    CHECK(flat[2].path == "sample/site/notes");
  }

  TEST_CASE("text helpers") {
    CHECK(normalize_text_key("  Liver ") == "liver");
    CHECK(casefold("STRASSE") == casefold("straße"));
    CHECK(canonical_decimal(1.5) == "1.5");
    CHECK(canonical_decimal(12) == "12");
    CHECK(is_resource_id("6f1c2a40-8d3e-4b7a-9c21-5e0f4a7b1001"));
    CHECK_FALSE(is_resource_id("6F1C2A40-8D3E-4B7A-9C21-5E0F4A7B1001"));
    CHECK(json_pointer_append("/a", "b/c~") == "/a/b~1c~0");
    CHECK(is_calendar_date("2024-02-29"));
    CHECK_FALSE(is_calendar_date("2023-02-29"));
  }
}
