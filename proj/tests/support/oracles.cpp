#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <unistd.h>

namespace metaforge::testing {

std::string ascii_key(const std::string& raw) {
  std::string out;
  for (char ch : raw)
    if (ch != ' ') out += static_cast<char>(ch >= 'A' && ch <= 'Z' ? ch - 'A' + 'a' : ch);
  return out;
}

std::vector<RecountSuggestion> recount_suggest(const RawCorpus& c, const std::string& target,
                                               const std::vector<std::pair<std::string, std::string>>& context,
                                               std::size_t k, std::uint64_t min_support) {
  auto has = [&](std::size_t i, const std::string& field, const std::string& key) {
    auto it = c.instances[i].find(field);
    if (it == c.instances[i].end()) return false;
    for (const auto& v : it->second)
      if (ascii_key(v) == key) return true;
    return false;
  };
  const std::size_t n = c.instances.size();
  if (n == 0) return {};

  // Context pairs that occur at least once, each counted once.
  std::vector<std::pair<std::string, std::string>> seen;
  for (const auto& [field, raw] : context) {
    const std::pair<std::string, std::string> pair{field, ascii_key(raw)};
    if (std::find(seen.begin(), seen.end(), pair) != seen.end()) continue;
    for (std::size_t i = 0; i < n; ++i)
      if (has(i, pair.first, pair.second)) {
        seen.push_back(pair);
        break;
      }
  }

  std::set<std::string> candidates;
  for (const auto& inst : c.instances)
    if (auto it = inst.find(target); it != inst.end())
      for (const auto& v : it->second) candidates.insert(ascii_key(v));

  std::vector<RecountSuggestion> out;
  for (const auto& v : candidates) {
    RecountSuggestion s{v, 0, 0};
    for (std::size_t i = 0; i < n; ++i) s.support += has(i, target, v);
    if (s.support < min_support) continue;
    if (seen.empty()) {
      s.score = Rational(s.support, n);
    } else {
      Rational total = 0;
      for (const auto& [field, key] : seen) {
        std::uint64_t with_context = 0, both = 0;
        for (std::size_t i = 0; i < n; ++i) {
          if (!has(i, field, key)) continue;
          ++with_context;
          both += has(i, target, v);
        }
        total += Rational(both, with_context);
      }
      s.score = total / Rational(seen.size());
    }
    out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const RecountSuggestion& a, const RecountSuggestion& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.support != b.support) return a.support > b.support;
    return a.value < b.value;
  });
  if (out.size() > k) out.resize(k);
  return out;
}

bool graph_has_cycle(const RefGraph& g) {
  std::vector<int> state(g.edges.size(), 0);  // 0 new, 1 on stack, 2 done
  std::function<bool(int)> visit = [&](int v) {
    state[v] = 1;
    for (int w : g.edges[v]) {
      if (state[w] == 1) return true;
      if (state[w] == 0 && visit(w)) return true;
    }
    state[v] = 2;
    return false;
  };
  return visit(0);
}

std::uint64_t graph_leaf_count(const RefGraph& g) {
  std::map<int, std::uint64_t> memo;
  std::function<std::uint64_t(int)> leaves = [&](int v) -> std::uint64_t {
    if (auto it = memo.find(v); it != memo.end()) return it->second;
    std::uint64_t total = 1;  // a field node, or an element's own field
    if (!g.isField[v])
      for (int w : g.edges[v]) total += leaves(w);
    return memo[v] = total;
  };
  return leaves(0);
}

Level AclWorld::permission(const std::string& user, const std::string& node) const {
  auto matches = [&](const std::string& who) {
    if (who == "everyone") return true;
    if (who == "user:" + user) return true;
    if (who.rfind("group:", 0) == 0) {
      auto g = groups.find(who.substr(6));
      return g != groups.end() && g->second.count(user) > 0;
    }
    return false;
  };
  Level best = Level::none;
  for (std::string at = node; !at.empty(); at = nodes.at(at).parent) {
    if (at == top && at != node) break;
    const Node& n = nodes.at(at);
    if (n.owner == user) best = Level::write;
    for (const auto& g : n.grants)
      if (matches(g.who) && g.level > best) best = g.level;
  }
  return best;
}

std::vector<ThreeFieldCase> all_three_field_cases() {
  std::vector<ThreeFieldCase> out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c) out.push_back({a, b, c});
  return out;
}

Json three_field_instance(const ThreeFieldCase& c) {
  Json doc = Json::object();
  doc["@id"] = "https://example.org/cases/" + std::to_string(c.count) + std::to_string(c.code) + std::to_string(c.organ);
  doc["@type"] = "urn:metaforge:template:6f1c2a40-8d3e-4b7a-9c21-5e0f4a7b1003";
  const std::array<Json, 4> count{Json(), Json{{"@value", 5}}, Json("five"), Json{{"@value", 11}}};
  const std::array<Json, 4> code{Json(), Json{{"@value", "ABC"}}, Json(123), Json{{"@value", "abcd"}}};
  const std::array<Json, 4> organ{
      Json(), Json{{"@id", "http://purl.obolibrary.org/obo/UBERON_0002107"}, {"rdfs:label", "liver"}},
      Json{{"@value", 42}}, Json{{"@id", "http://purl.obolibrary.org/obo/UBERON_0002113"}, {"rdfs:label", "kidney"}}};
  if (c.count) doc["count"] = count[c.count];
  if (c.code) doc["code"] = code[c.code];
  if (c.organ) doc["organ"] = organ[c.organ];
  return doc;
}

std::vector<std::pair<std::string, std::string>> three_field_expected(const ThreeFieldCase& c) {
  std::vector<std::pair<std::string, std::string>> out;
  // Missing required fields come first, in template order.
  if (c.count == 0) out.emplace_back("", "MISSING_REQUIRED");
  if (c.organ == 0) out.emplace_back("", "MISSING_REQUIRED");
  if (c.count == 2) out.emplace_back("/count", "TYPE_MISMATCH");
  if (c.count == 3) out.emplace_back("/count", "OUT_OF_RANGE");
  if (c.code == 2) out.emplace_back("/code", "TYPE_MISMATCH");
  if (c.code == 3) out.emplace_back("/code", "PATTERN_MISMATCH");
  if (c.organ == 2) out.emplace_back("/organ", "TYPE_MISMATCH");
  if (c.organ == 3) out.emplace_back("/organ", "TERM_NOT_IN_CONSTRAINT");
  return out;
}

std::optional<std::string> ntriples_grammar_error(const std::string& doc) {
  const std::string iri = R"(<(?:[^\x00-\x20<>"{}|^`\\]|\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8})*>)";
  const std::string blank = R"(_:[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)";
  const std::string literal = R"("(?:[^"\\\n\r]|\\[tbnrf"'\\]|\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8})*")" "(?:\\^\\^" + iri +
                              "|@[a-zA-Z]+(?:-[a-zA-Z0-9]+)*)?";
  const std::regex line_re("^(?:" + iri + "|" + blank + ")[ \\t]+" + iri + "[ \\t]+(?:" + iri + "|" + blank + "|" +
                           literal + ")[ \\t]*\\.[ \\t]*$");
  std::istringstream in(doc);
  std::string line;
  while (std::getline(in, line))
    if (!std::regex_match(line, line_re)) return line;
  if (!doc.empty() && doc.back() != '\n') return std::string("missing final newline");
  return std::nullopt;
}

std::optional<std::size_t> rdflib_triple_count(const std::string& doc) {
  const auto file = std::filesystem::temp_directory_path() / ("mf-nt-" + std::to_string(::getpid()) + ".nt");
  {
    std::ofstream out(file, std::ios::binary);
    out << doc;
  }
  const std::string script =
      "import sys\n"
      "try:\n"
      "    import rdflib\n"
      "except ImportError:\n"
      "    print('NO_RDFLIB'); sys.exit(0)\n"
      "g = rdflib.Graph()\n"
      "g.parse(sys.argv[1], format='nt')\n"
      "print(len(g))\n";
  const std::string command = "python3 -c \"" + std::regex_replace(script, std::regex("\""), "\\\"") + "\" '" +
                              file.string() + "' 2>&1";
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return std::nullopt;
  std::string output;
  std::array<char, 256> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) output += buf.data();
  const int status = ::pclose(pipe);
  std::filesystem::remove(file);
  if (status != 0) {
    if (output.find("not found") != std::string::npos) return std::nullopt;
    throw std::runtime_error("rdflib rejected the document: " + output);
  }
  if (output.rfind("NO_RDFLIB", 0) == 0) return std::nullopt;
  return static_cast<std::size_t>(std::stoul(output));
}

}  // namespace metaforge::testing
