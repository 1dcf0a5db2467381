// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Budgets and sample sizes are fixed below.

#include "fixtures.hpp"
#include "generators.hpp"
#include "oracles.hpp"
#include "permission_fixture.hpp"

#include "metaforge/cli.hpp"
#include "metaforge/compiler.hpp"
#include "metaforge/composition.hpp"
#include "metaforge/error.hpp"
#include "metaforge/instance_io.hpp"
#include "metaforge/mock_servers.hpp"
#include "metaforge/recommender.hpp"
#include "metaforge/repository.hpp"
#include "metaforge/service.hpp"
#include "metaforge/template_io.hpp"
#include "metaforge/terminology.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

using namespace metaforge;
using namespace metaforge::testing;

namespace {

constexpr int round_trip_samples = 500;
constexpr int graph_samples = 500;
constexpr int graph_max_nodes = 50;
constexpr double graph_cycle_rate = 0.2;
constexpr int corpus_samples = 100;
constexpr int queries_per_corpus = 5;
constexpr int concurrency_trials = 100;
constexpr double compile_budget_ms = 50;
constexpr double validate_budget_ms = 5000;
constexpr double suggest_budget_ms = 50;
constexpr std::size_t perf_instances = 1000;
constexpr std::size_t perf_index_size = 10000;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
  void expect(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt_ms(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f ms", ms);
  return buf;
}

TemplateLookup lookup_in(const std::vector<Template>& items) {
  auto known = std::make_shared<std::map<ResourceId, Template>>();
  for (const auto& t : items) known->emplace(t.id, t);
  return [known](const ResourceId& id) -> std::optional<Template> {
    auto it = known->find(id);
    if (it == known->end()) return std::nullopt;
    return it->second;
  };
}

bool has_reference(const Template& t) {
  for (const auto& c : t.children) {
    if (std::holds_alternative<Reference>(c)) return true;
    if (const auto* e = std::get_if<Box<Template>>(&c); e != nullptr && has_reference(**e)) return true;
  }
  return false;
}

std::uint64_t leaves(const Template& t) {
  std::uint64_t n = 0;
  for (const auto& c : t.children) {
    if (std::holds_alternative<FieldSpec>(c)) ++n;
    else if (const auto* e = std::get_if<Box<Template>>(&c)) n += leaves(**e);
  }
  return n;
}

ResolvedTemplate load_fixture_template(const std::string& name) {
  const Template site = parse_template(read_text(fixture("library/site-element.json")));
  return resolve_composition(parse_template(read_text(fixture(name))), lookup_in({site}));
}

MembershipOracle local_oracle() {
  auto service = std::make_shared<TerminologyService>(TerminologyConfig{}, std::make_shared<InMemoryTermStore>());
  return [service](const ValueConstraintSet& c, std::string_view iri) { return service->is_member(c, iri); };
}

std::vector<std::string> lines_of(const std::string& doc) {
  std::vector<std::string> out;
  std::istringstream in(doc);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Counts what the export should emit by walking the instance document:
// literal leaves, term leaves, and element objects holding a filled leaf.
struct LeafCount {
  std::size_t literals = 0, terms = 0, elements = 0;
};

bool count_object(const Json& obj, bool top, LeafCount& n) {
  bool filled = false;
  for (const auto& [key, value] : obj.items()) {
    if (key.starts_with("@") || key == "rdfs:label") continue;
    const Json items = value.is_array() ? value : Json::array({value});
    for (const auto& v : items) {
      if (v.is_object() && v.contains("@id")) {
        ++n.terms;
        filled = true;
      } else if (v.is_object() && !v.contains("@value")) {
        filled = count_object(v, false, n) || filled;
      } else {
        ++n.literals;
        filled = true;
      }
    }
  }
  if (!top && filled) ++n.elements;
  return filled;
}

// ---- 1 --------------------------------------------------------------------

Outcome model_round_trip() {
  Outcome o;
  Rng rng(1001);
  int templates = 0, instances = 0;
  for (int i = 0; i < round_trip_samples; ++i) {
    try {
      const Template t = template_from_json(random_template_json(rng));
      const std::string s1 = serialize_template(t);
      if (serialize_template(parse_template(s1)) == s1) ++templates;
      else o.fail("template " + std::to_string(i) + " is not a fixpoint");
      const MetadataInstance m = instance_from_json(random_instance_json(rng, t));
      const std::string i1 = serialize_instance(m);
      if (serialize_instance(parse_instance(i1)) == i1) ++instances;
      else o.fail("instance " + std::to_string(i) + " is not a fixpoint");
    } catch (const std::exception& e) {
      o.fail("sample " + std::to_string(i) + ": " + e.what());
    }
  }
  if (o.pass)
    o.detail = std::to_string(templates) + " templates, " + std::to_string(instances) + " instances, 0 failures";
  return o;
}

// ---- 2 --------------------------------------------------------------------

Outcome composition() {
  Outcome o;
  Rng rng(2002);
  std::bernoulli_distribution cyclic_draw(graph_cycle_rate);
  int resolved = 0, cycles = 0;
  for (int i = 0; i < graph_samples; ++i) {
    const RefGraph g = random_ref_graph(rng, graph_max_nodes, cyclic_draw(rng));
    const auto items = graph_templates(g);
    const bool cyclic = graph_has_cycle(g);
    const std::string tag = "graph " + std::to_string(i) + ": ";
    try {
      const ResolvedTemplate rt = resolve_composition(items[0], lookup_in(items));
      o.expect(!cyclic, tag + "cycle not detected");
      o.expect(!has_reference(rt.tree()), tag + "references remain");
      o.expect(leaves(rt.tree()) == graph_leaf_count(g), tag + "leaf count differs from the graph");
      o.expect(resolve_composition(rt.tree(), lookup_in({})) == rt, tag + "not idempotent");
      ++resolved;
    } catch (const Error& e) {
      o.expect(e.code() == "CYCLE_DETECTED" && cyclic, tag + e.code() + " " + e.what());
      ++cycles;
    }
  }
  if (o.pass) o.detail = std::to_string(resolved) + " resolved, " + std::to_string(cycles) + " cycles detected";
  return o;
}

// ---- 3 --------------------------------------------------------------------

Outcome validation_oracle() {
  Outcome o;
  const ResolvedTemplate rt = load_fixture_template("validation-template.json");
  const Validator validator(rt);
  const auto oracle = local_oracle();
  int agree = 0, accepted = 0;
  for (const auto& c : all_three_field_cases()) {
    const Json doc = three_field_instance(c);
    const ValidationReport report = validator.validate(instance_from_json(doc), oracle);
    const auto expected = three_field_expected(c);
    std::vector<std::pair<std::string, std::string>> got;
    for (const auto& e : report.errors) got.emplace_back(e.path, std::string(to_string(e.code)));
    if (report.valid == expected.empty() && got == expected) ++agree;
    else o.fail("disagreement on " + doc.dump());
    if (report.valid) ++accepted;
  }
  const ResolvedTemplate five = load_fixture_template("five-types-template.json");
  const auto report = validate(five, parse_instance(read_text(fixture("numeric-in-term.json"))), oracle);
  o.expect(!report.valid && report.errors.size() == 1 && report.errors[0].code == ErrorCode::type_mismatch &&
               report.errors[0].path == "/organ",
           "numeric value in the term field did not give TYPE_MISMATCH at /organ");
  if (o.pass) o.detail = std::to_string(agree) + "/64 agree (" + std::to_string(accepted) + " valid); numeric-in-term -> TYPE_MISMATCH";
  return o;
}

// ---- 4 --------------------------------------------------------------------

Outcome rdf_export() {
  Outcome o;
  struct Case {
    std::string tmpl, inst;
  };
  std::vector<Case> cases = {{"rdf-flat-template.json", "rdf-flat-instance.json"},
                             {"nested-template.json", "nested-instance.json"},
                             {"five-types-template.json", "five-types-valid.json"}};
  for (int i = 1; i <= 5; ++i) cases.push_back({"tissue-template.json", "corpus/sample-" + std::to_string(i) + ".json"});

  bool rdflib_used = true;
  std::size_t triples = 0;
  for (const auto& c : cases) {
    const ResolvedTemplate rt = load_fixture_template(c.tmpl);
    const Json doc = parse_json(read_text(fixture(c.inst)));
    LeafCount n;
    count_object(doc, true, n);
    const std::size_t expected = 1 + n.literals + 2 * n.terms + n.elements;
    const std::string out = export_ntriples(rt, instance_from_json(doc));
    const auto lines = lines_of(out);
    o.expect(lines.size() == expected, c.inst + ": " + std::to_string(lines.size()) + " lines, closed form gives " +
                                           std::to_string(expected));
    o.expect(std::is_sorted(lines.begin(), lines.end()), c.inst + ": lines not sorted");
    o.expect(out == export_ntriples(rt, instance_from_json(doc)), c.inst + ": output differs between runs");
    o.expect(!out.empty() && out.back() == '\n' && out.find('\r') == std::string::npos, c.inst + ": line endings");
    try {
      const auto parsed = rdflib_triple_count(out);
      if (parsed) o.expect(*parsed == expected, c.inst + ": rdflib parsed " + std::to_string(*parsed) + " triples");
      else {
        rdflib_used = false;
        const auto bad = ntriples_grammar_error(out);
        o.expect(!bad, c.inst + ": grammar rejects " + bad.value_or(""));
      }
    } catch (const std::exception& e) {
      o.fail(c.inst + ": rdflib rejected the output: " + e.what());
    }
    triples += lines.size();
  }
  if (o.pass)
    o.detail = std::to_string(cases.size()) + " fixtures, " + std::to_string(triples) + " triples, checked by " +
               (rdflib_used ? "rdflib" : "the built-in grammar (rdflib unavailable)");
  return o;
}

// ---- 5 --------------------------------------------------------------------

Outcome recommender() {
  Outcome o;
  Rng rng(5005);
  int queries = 0;
  for (int trial = 0; trial < corpus_samples && o.pass; ++trial) {
    const RawCorpus c = random_corpus(rng);
    std::vector<MetadataInstance> instances;
    for (std::size_t i = 0; i < c.instances.size(); ++i) instances.push_back(instance_from_json(corpus_instance_json(c, i)));
    const CorpusIndex idx = index_corpus(c.templateId, instances);
    const Template tree = corpus_template(c);
    for (int q = 0; q < queries_per_corpus; ++q) {
      const std::string target = c.fields[rng() % c.fields.size()];
      std::vector<std::pair<std::string, std::string>> raw;
      std::vector<ContextPair> context;
      for (int n = static_cast<int>(rng() % 4); n > 0; --n) {
        const std::string f = c.fields[rng() % c.fields.size()];
        if (f == target) continue;
        const std::string v = (rng() % 2 ? "V" : "v") + std::to_string(rng() % 6);
        raw.emplace_back(f, v);
        context.push_back(context_pair(&tree, f, v));
      }
      const std::size_t k = 1 + rng() % 6;
      const std::uint64_t min_support = 1 + rng() % 2;
      const auto got = suggest(idx, target, context, k, min_support);
      const auto want = recount_suggest(c, target, raw, k, min_support);
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i)
        same = got[i].valueKey == want[i].value && got[i].score == want[i].score && got[i].supportCount == want[i].support;
      o.expect(same, "corpus " + std::to_string(trial) + " query " + std::to_string(q) + " differs from the recount");
      ++queries;
    }
  }

  std::vector<MetadataInstance> fixture_corpus;
  for (int i = 1; i <= 5; ++i)
    fixture_corpus.push_back(parse_instance(read_text(fixture("corpus/sample-" + std::to_string(i) + ".json"))));
  const auto s = suggest(index_corpus(fixture_corpus[0].templateId, fixture_corpus), "disease", {{"tissue", "liver"}}, 2);
  o.expect(s.size() == 2 && s[0].valueKey == "hepatitis" && s[0].score == Rational(3, 4) && s[1].valueKey == "cirrhosis" &&
               s[1].score == Rational(1, 4),
           "fixture corpus did not give [hepatitis 3/4, cirrhosis 1/4]");
  if (o.pass) o.detail = std::to_string(queries) + " queries over " + std::to_string(corpus_samples) + " corpora exact; fixture [hepatitis 3/4, cirrhosis 1/4]";
  return o;
}

// ---- 6 --------------------------------------------------------------------

Outcome permissions() {
  Outcome o;
  TempDir dir;
  Repository repo(dir.path);
  const auto fx = PermissionFixture::build(repo);
  int pairs = 0;
  for (const auto& [user, uid] : fx.users) {
    for (const auto& [node, rid] : fx.nodes) {
      const int got = static_cast<int>(repo.effective_permission(uid, rid));
      const int want = static_cast<int>(fx.world.permission(user, node));
      o.expect(got == want, user + " on " + node + ": " + std::to_string(got) + " vs " + std::to_string(want));
      ++pairs;
    }
  }

  const User u = repo.create_user("writer");
  int exact = 0;
  for (int trial = 0; trial < concurrency_trials; ++trial) {
    ResourceRecord r;
    r.id = ResourceId::generate();
    r.resourceType = ResourceType::template_;
    r.parentFolder = u.homeFolder;
    r.payload = minimal_template_json(r.id, "T");
    const ResourceRecord stored = repo.put_resource(r, std::nullopt, u.id);
    std::barrier sync(2);
    std::atomic<int> ok{0}, conflicts{0};
    auto writer = [&](const char* text) {
      ResourceRecord mine = stored;
      mine.payload["description"] = text;
      sync.arrive_and_wait();
      try {
        repo.put_resource(mine, stored.version, u.id);
        ++ok;
      } catch (const Error& e) {
        if (e.code() == "VERSION_CONFLICT") ++conflicts;
      }
    };
    std::thread a(writer, "a"), b(writer, "b");
    a.join();
    b.join();
    if (ok == 1 && conflicts == 1) ++exact;
    else o.fail("trial " + std::to_string(trial) + ": " + std::to_string(ok.load()) + " successes");
  }
  if (o.pass)
    o.detail = std::to_string(pairs) + " pairs match; " + std::to_string(exact) + "/" + std::to_string(concurrency_trials) +
               " trials with one success and one VERSION_CONFLICT";
  return o;
}

// ---- 7 --------------------------------------------------------------------

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "ok";
}

Outcome terminology() {
  Outcome o;
  const std::string obo = "http://purl.obolibrary.org/obo/";
  const std::string root = obo + "UBERON_0001062";
  MockTerminologyServer server(Taxonomy::load(fixture("taxonomy.json")), "acceptance-key");
  server.start();
  auto minutes = std::make_shared<std::atomic<long>>(0);
  TerminologyConfig cfg;
  cfg.baseUrl = server.url();
  cfg.apiKey = "acceptance-key";
  cfg.clock = [minutes] { return Clock::time_point(std::chrono::minutes(minutes->load())); };
  TerminologyService svc(cfg, std::make_shared<InMemoryTermStore>());

  const auto without = svc.expand_branch("UBERON", root, false);
  const auto with = svc.expand_branch("UBERON", root, true);
  o.expect(without.size() == 6, "branch gave " + std::to_string(without.size()) + " IRIs");
  o.expect(with.size() == 7 && with.contains(root), "branch with root gave " + std::to_string(with.size()) + " IRIs");

  const ValueSet vs = svc.create_value_set("extra", {{obo + "UBERON_0002385", "muscle tissue"}});
  ValueConstraintSet c;
  c.sources.push_back(OntologyBranch{"UBERON", obo + "UBERON_0000062", false});
  c.sources.push_back(ValueSetSource{vs.id});
  c.sources.push_back(LiteralList{{{"kidney", obo + "UBERON_0002113"}}});
  // organ's children (lung, liver), the value set, the literal
  const std::set<std::string> union_set{obo + "UBERON_0002048", obo + "UBERON_0002107", obo + "UBERON_0002385",
                                        obo + "UBERON_0002113"};
  int probes = 0;
  for (const auto& probe : {obo + "UBERON_0002107", obo + "UBERON_0002048", obo + "UBERON_0002385", obo + "UBERON_0002113",
                            obo + "UBERON_0000062", obo + "UBERON_0000483"}) {
    o.expect(svc.is_member(c, probe) == union_set.contains(probe), "membership of " + probe);
    ++probes;
  }

  server.set_available(false);
  const std::string warm = code_of([&] { svc.expand_branch("UBERON", root, false); });
  *minutes += 11;
  const std::string stale = code_of([&] { svc.expand_branch("UBERON", root, false); });
  svc.clear_cache();
  const std::string cold = code_of([&] { svc.expand_branch("UBERON", root, false); });
  o.expect(warm == "ok" && stale == "ok", "cached branch not served while down: " + warm + "/" + stale);
  o.expect(cold == "TERMINOLOGY_UNAVAILABLE", "cold cache while down gave " + cold);
  server.set_available(true);
  o.expect(code_of([&] { svc.expand_branch("UBERON", root, false); }) == "ok", "no recovery after the remote returned");
  if (o.pass)
    o.detail = "6 IRIs (7 with root); " + std::to_string(probes) +
               " probes match the union; warm and stale cache served, cold cache TERMINOLOGY_UNAVAILABLE";
  return o;
}

// ---- 8 --------------------------------------------------------------------

struct Process {
  int code = -1;
  std::string out;
};

std::string quoted(const std::string& s) {
  std::string q = "'";
  for (char ch : s) q += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return q + "'";
}

// Runs the installed command-line tool when it was built next to us, else
// the same code in-process.
Process run_cli_tool(const std::vector<std::string>& args) {
  Process p;
#ifdef METAFORGE_CLI_PATH
  std::string cmd = quoted(METAFORGE_CLI_PATH);
  for (const auto& a : args) cmd += " " + quoted(a);
  cmd += " 2>/dev/null";
  if (FILE* pipe = ::popen(cmd.c_str(), "r")) {
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) p.out.append(buf, n);
    const int status = ::pclose(pipe);
    p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
#else
  std::ostringstream out, err;
  p.code = run_cli(args, out, err);
  p.out = out.str();
#endif
  return p;
}

HttpResponse call(Service& s, const User& u, const std::string& method, const std::string& path,
                  const std::string& body = "", std::multimap<std::string, std::string> query = {}) {
  HttpRequest r;
  r.method = method;
  r.path = path;
  r.query = std::move(query);
  r.body = body;
  r.headers["authorization"] = "apikey token=" + u.token;
  return s.dispatch(r);
}

Outcome end_to_end() {
  Outcome o;
  TempDir dir;
  MockSubmissionServer endpoint;
  MockValidatorServer validator;
  endpoint.start();
  validator.start();
  ScopedEnv key("METAFORGE_ACCEPTANCE_SUBMIT_KEY", std::string("acceptance"));

  ServiceConfig cfg;
  cfg.dataDir = dir.path;
  SubmissionTarget target;
  target.name = "mock";
  target.endpointUrl = endpoint.url() + "/submit";
  target.apiKeyEnvVar = "METAFORGE_ACCEPTANCE_SUBMIT_KEY";
  target.externalValidatorUrl = validator.url() + "/validate";
  cfg.targets = {target};

  const std::string tissue = fixture("tissue-template.json").string();
  std::vector<std::string> instance_ids;
  User u;
  {
    Service svc(cfg);
    u = svc.repository().create_user("pipeline");
    const auto created = call(svc, u, "POST", "/api/v1/templates", read_text(tissue));
    o.expect(created.status == 201, "template create gave HTTP " + std::to_string(created.status));
    const std::string tid = created.status == 201 ? parse_json(created.body)["id"].get<std::string>() : "";

    for (int i = 1; i <= 5; ++i) {
      const std::string body = read_text(fixture("corpus/sample-" + std::to_string(i) + ".json"));
      const auto report = call(svc, u, "POST", "/api/v1/templates/" + tid + "/validate", body);
      o.expect(report.status == 200 && parse_json(report.body)["valid"] == true, "sample " + std::to_string(i) + " did not validate");
      const auto saved = call(svc, u, "POST", "/api/v1/instances", body);
      o.expect(saved.status == 201, "sample " + std::to_string(i) + " save gave HTTP " + std::to_string(saved.status));
      if (saved.status != 201) continue;
      instance_ids.push_back(parse_json(saved.body)["id"]);
      const auto sub = call(svc, u, "POST", "/api/v1/instances/" + instance_ids.back() + "/submit", R"({"target":"mock"})");
      o.expect(sub.status == 201, "submit gave HTTP " + std::to_string(sub.status) + " " + sub.body);
    }
  }

  // Receipts must survive a restart of the service.
  Service svc(cfg);
  int receipts = 0;
  for (const auto& id : instance_ids) {
    const auto r = call(svc, u, "GET", "/api/v1/instances/" + id + "/receipts");
    if (r.status != 200) {
      o.fail("receipts gave HTTP " + std::to_string(r.status) + " " + r.body);
      continue;
    }
    const Json listed = parse_json(r.body);
    for (const auto& receipt : listed["receipts"]) {
      const Json& payload = receipt.contains("payload") ? receipt["payload"] : receipt;
      if (payload["httpStatus"] == 201) ++receipts;
    }
  }
  o.expect(receipts == 5, std::to_string(receipts) + " receipts with httpStatus 201");

  int identical = 0;
  const auto rest_validate = call(svc, u, "POST", "/api/v1/templates/6f1c2a40-8d3e-4b7a-9c21-5e0f4a7b1001/validate",
                                  read_text(fixture("corpus/sample-2.json")));
  const auto cli_validate = run_cli_tool({"validate", "--template", tissue, fixture("corpus/sample-2.json").string()});
  if (cli_validate.code == 0 && rest_validate.body == cli_validate.out) ++identical;
  else o.fail("validate bodies differ");

  const auto rest_recommend = call(svc, u, "POST", "/api/v1/recommend",
                                   R"({"templateId":"6f1c2a40-8d3e-4b7a-9c21-5e0f4a7b1001","targetPath":"disease",)"
                                   R"("context":[{"path":"tissue","value":"liver"}],"k":5})");
  const auto cli_recommend = run_cli_tool({"recommend", "--corpus", fixture("corpus").string(), "--template", tissue,
                                           "--target", "disease", "--context", "tissue=liver", "-k", "5"});
  if (cli_recommend.code == 0 && rest_recommend.body == cli_recommend.out) ++identical;
  else o.fail("recommend bodies differ");

  if (!instance_ids.empty()) {
    const auto rest_export = call(svc, u, "GET", "/api/v1/instances/" + instance_ids[0], "", {{"format", "ntriples"}});
    const auto cli_export = run_cli_tool({"export", "--format", "ntriples", "--template", tissue,
                                          fixture("corpus/sample-1.json").string()});
    if (cli_export.code == 0 && rest_export.body == cli_export.out) ++identical;
    else o.fail("export bodies differ");
  }
  if (o.pass) o.detail = "5 instances saved, validated and submitted; 5 receipts with 201; " + std::to_string(identical) + "/3 CLI/REST bodies identical";
  return o;
}

// ---- 9 --------------------------------------------------------------------

Json fifty_field_template() {
  Json children = Json::array();
  const char* types[] = {"text", "paragraph", "number", "date", "term"};
  for (int i = 0; i < 50; ++i) {
    Json f{{"name", "field" + std::to_string(i)},
           {"fieldType", types[i % 5]},
           {"required", i % 3 == 0},
           {"propertyIri", "https://example.org/terms/f" + std::to_string(i)}};
    switch (i % 5) {
      case 0: f["constraints"] = Json{{"minLength", 1}, {"maxLength", 40}, {"pattern", "^[A-Za-z0-9 ]+$"}}; break;
      case 1: f["constraints"] = Json{{"maxLength", 2000}}; break;
      case 2: f["constraints"] = Json{{"minimum", 0}, {"maximum", 1000}, {"decimalPlaces", 2}}; break;
      case 4:
        f["constraints"] = Json{{"sources", Json::array({Json{{"type", "literalList"},
                                                              {"entries", Json::array({
                                                                  Json{{"label", "a"}, {"iri", "https://example.org/a"}},
                                                                  Json{{"label", "b"}, {"iri", "https://example.org/b"}}})}}})}};
        break;
      default: break;
    }
    children.push_back(std::move(f));
  }
  return Json{{"id", "6f1c2a40-8d3e-4b7a-9c21-5e0f4a7b9001"}, {"kind", "template"}, {"name", "Fifty"}, {"children", children}};
}

Outcome performance() {
  Outcome o;
  std::ostringstream detail;

  const Template fifty = template_from_json(fifty_field_template());
  double compile_ms = 0;
  for (int run = 0; run < 10; ++run) {
    const auto start = Clock::now();
    const ValidationSchema schema = compile(resolve_composition(fifty, lookup_in({})));
    compile_ms = std::max(compile_ms, ms_since(start));
    o.expect(!schema.schemaDoc.empty(), "empty schema");
  }
  o.expect(compile_ms < compile_budget_ms, "compile took " + fmt_ms(compile_ms));
  detail << "compile " << fmt_ms(compile_ms) << " (max of 10)";

  const ResolvedTemplate five = load_fixture_template("five-types-template.json");
  const Json valid = parse_json(read_text(fixture("five-types-valid.json")));
  const Json numeric = parse_json(read_text(fixture("numeric-in-term.json")));
  std::vector<std::string> docs;
  for (std::size_t i = 0; i < perf_instances; ++i) {
    Json d = i % 4 == 3 ? numeric : valid;
    d["@id"] = "https://example.org/perf/" + std::to_string(i);
    d["title"] = "Sample " + std::to_string(i);
    docs.push_back(d.dump());
  }
  const auto oracle = local_oracle();
  const auto start = Clock::now();
  const Validator validator(five);
  std::size_t valid_count = 0;
  for (const auto& d : docs) valid_count += validator.validate(parse_instance(d), oracle).valid ? 1 : 0;
  const double validate_ms = ms_since(start);
  o.expect(valid_count == perf_instances * 3 / 4, "unexpected validity count " + std::to_string(valid_count));
  o.expect(validate_ms < validate_budget_ms, "validating took " + fmt_ms(validate_ms));
  detail << "; validate " << perf_instances << " in " << fmt_ms(validate_ms);

  Rng rng(9009);
  RawCorpus c;
  c.templateId = ResourceId::parse("6f1c2a40-8d3e-4b7a-9c21-5e0f4a7b9002");
  for (int f = 0; f < 8; ++f) c.fields.push_back("f" + std::to_string(f));
  for (std::size_t i = 0; i < perf_index_size; ++i) {
    std::map<std::string, std::vector<std::string>> inst;
    for (const auto& f : c.fields) {
      inst[f].push_back("v" + std::to_string(rng() % 5));
      if (rng() % 4 == 0) inst[f].push_back("v" + std::to_string(rng() % 5));
    }
    c.instances.push_back(std::move(inst));
  }
  LiveIndex index;
  for (std::size_t i = 0; i < c.instances.size(); ++i) index.add(instance_from_json(corpus_instance_json(c, i)));
  o.expect(index.size(c.templateId) == perf_index_size, "index size");
  const Template tree = corpus_template(c);
  double suggest_ms = 0;
  for (int q = 0; q < 100; ++q) {
    std::vector<ContextPair> context;
    const std::string target = c.fields[q % 8];
    for (int n = 0; n < 3; ++n) {
      const std::string f = c.fields[(q + 1 + n) % 8];
      context.push_back(context_pair(&tree, f, "v" + std::to_string(rng() % 5)));
    }
    const auto s = Clock::now();
    const auto out = index.suggest(c.templateId, target, context, 5);
    suggest_ms = std::max(suggest_ms, ms_since(s));
    o.expect(!out.empty(), "no suggestions");
  }
  o.expect(suggest_ms < suggest_budget_ms, "suggest took " + fmt_ms(suggest_ms));
  detail << "; suggest over " << perf_index_size << " " << fmt_ms(suggest_ms) << " (max of 100)";
  if (o.pass) o.detail = detail.str();
  else o.detail += " [" + detail.str() + "]";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {model_round_trip, composition, validation_oracle,
                                                         rdf_export,       recommender, permissions,
                                                         terminology,      end_to_end,  performance};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.fail(std::string("uncaught: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << " " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
