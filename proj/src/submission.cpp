#include "metaforge/submission.hpp"

#include "metaforge/error.hpp"
#include "metaforge/http_util.hpp"
#include "metaforge/instance_io.hpp"
#include "metaforge/text.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace metaforge {

namespace {

[[noreturn]] void bad_target(const std::string& message, const std::string& path) {
  throw Error(errc::model_violation, message, path);
}

std::string target_string(const Json& doc, const char* key, const std::string& path) {
  if (!doc.contains(key) || !doc[key].is_string() || doc[key].get_ref<const std::string&>().empty())
    bad_target(std::string("target needs a non-empty string '") + key + "'", json_pointer_append(path, key));
  return doc[key].get<std::string>();
}

std::string read_text(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot read " + file.string());
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

}  // namespace

std::vector<SubmissionTarget> targets_from_json(const Json& doc) {
  const Json& list = doc.is_object() && doc.contains("targets") ? doc["targets"] : doc;
  const std::string base = doc.is_object() ? "/targets" : "";
  if (!list.is_array()) bad_target("targets must be an array", base);
  std::vector<SubmissionTarget> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = json_pointer_append(base, i);
    const Json& t = list[i];
    if (!t.is_object()) bad_target("target must be an object", at);
    SubmissionTarget target;
    target.name = target_string(t, "name", at);
    target.endpointUrl = target_string(t, "endpointUrl", at);
    if (!is_http_url(target.endpointUrl)) bad_target("endpointUrl must be an http(s) URL", at + "/endpointUrl");
    const std::string format = t.contains("format") ? target_string(t, "format", at) : "json";
    if (format == "json") target.format = TargetFormat::json;
    else if (format == "tsv") target.format = TargetFormat::tsv;
    else bad_target("format must be json or tsv", at + "/format");
    target.apiKeyEnvVar = target_string(t, "apiKeyEnvVar", at);
    if (t.contains("externalValidatorUrl") && !t["externalValidatorUrl"].is_null()) {
      target.externalValidatorUrl = target_string(t, "externalValidatorUrl", at);
      if (!is_http_url(*target.externalValidatorUrl))
        bad_target("externalValidatorUrl must be an http(s) URL", at + "/externalValidatorUrl");
    }
    for (const auto& seen : out)
      if (seen.name == target.name) bad_target("duplicate target name", at + "/name");
    out.push_back(std::move(target));
  }
  return out;
}

std::vector<SubmissionTarget> load_targets(const std::filesystem::path& data_dir) {
  if (const char* file = std::getenv("METAFORGE_TARGETS"); file != nullptr && *file != '\0')
    return targets_from_json(parse_json(read_text(file)));
  const auto local = data_dir / "targets.json";
  if (std::filesystem::exists(local)) return targets_from_json(parse_json(read_text(local)));
  return {};
}

Json external_result_to_json(const ExternalValidationResult& r) {
  Json out = Json::object();
  out["valid"] = r.valid;
  out["messages"] = Json::array();
  for (const auto& m : r.messages)
    out["messages"].push_back(Json{{"path", m.path}, {"message", m.message}, {"severity", m.severity}});
  return out;
}

Json receipt_to_json(const SubmissionReceipt& r) {
  Json out = Json::object();
  out["targetName"] = r.targetName;
  out["submittedAt"] = r.submittedAt;
  out["httpStatus"] = r.httpStatus;
  out["remoteId"] = r.remoteId ? Json(*r.remoteId) : Json(nullptr);
  out["rawResponse"] = r.rawResponse;
  out["forced"] = r.forced;
  out["localValidation"] = r.localValidation;
  out["externalValidation"] = r.externalValidation ? Json(*r.externalValidation) : Json(nullptr);
  return out;
}

SubmissionReceipt receipt_from_json(const Json& doc) {
  SubmissionReceipt r;
  r.targetName = doc.at("targetName").get<std::string>();
  r.submittedAt = doc.at("submittedAt").get<std::string>();
  r.httpStatus = doc.at("httpStatus").get<int>();
  if (doc.contains("remoteId") && doc["remoteId"].is_string()) r.remoteId = doc["remoteId"].get<std::string>();
  r.rawResponse = doc.at("rawResponse").get<std::string>();
  r.forced = doc.at("forced").get<bool>();
  r.localValidation = doc.at("localValidation").get<bool>();
  if (doc.contains("externalValidation") && doc["externalValidation"].is_boolean())
    r.externalValidation = doc["externalValidation"].get<bool>();
  return r;
}

// ---- tsv ---------------------------------------------------------------

namespace {

constexpr std::size_t tsv_max_depth = 3;

void leaf_paths(const Template& level, const std::string& prefix, std::vector<std::string>& out) {
  for (const auto& child : level.children) {
    const std::string path = prefix.empty() ? child_name(child) : prefix + "/" + child_name(child);
    if (const auto* e = std::get_if<Box<Template>>(&child)) leaf_paths(**e, path, out);
    else out.push_back(path);
  }
}

std::string cell_text(std::string text) {
  for (char& c : text)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return text;
}

void collect_cells(const InstanceObject& obj, const std::string& prefix, std::size_t depth,
                   std::map<std::string, std::vector<std::string>>& cells) {
  for (const auto& [name, entry] : obj.fields) {
    const std::string path = prefix.empty() ? name : prefix + "/" + name;
    for (const auto& v : entry.values) {
      if (const auto* nested = std::get_if<Box<InstanceObject>>(&v)) {
        collect_cells(**nested, path, depth + 1, cells);
        continue;
      }
      if (depth > tsv_max_depth)
        throw Error(errc::unserializable, "tsv holds at most " + std::to_string(tsv_max_depth) + " levels of nesting", "/" + path);
      if (const auto* lit = std::get_if<LiteralValue>(&v)) cells[path].push_back(cell_text(display_text(*lit)));
      else if (const auto* term = std::get_if<TermValue>(&v)) cells[path].push_back(cell_text(term->label + " [" + term->iri + "]"));
    }
  }
}

}  // namespace

std::string serialize_for_target(const ResolvedTemplate& rt, const MetadataInstance& m, TargetFormat format) {
  if (format == TargetFormat::json) return serialize_instance(m);
  std::vector<std::string> columns;
  leaf_paths(rt.tree(), "", columns);
  std::map<std::string, std::vector<std::string>> cells;
  collect_cells(m.values, "", 1, cells);
  std::string header;
  std::string row;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i > 0) {
      header += '\t';
      row += '\t';
    }
    header += cell_text(columns[i]);
    if (auto it = cells.find(columns[i]); it != cells.end()) {
      for (std::size_t j = 0; j < it->second.size(); ++j) {
        if (j > 0) row += '|';
        row += it->second[j];
      }
    }
  }
  return header + "\n" + row + "\n";
}

// ---- remote calls ------------------------------------------------------

ExternalValidationResult validate_external(const SubmissionTarget& target, const ResolvedTemplate& rt,
                                           const MetadataInstance& m, std::chrono::milliseconds timeout) {
  if (!target.externalValidatorUrl) throw Error(errc::invalid_argument, "target " + target.name + " has no external validator");
  const std::string payload = serialize_for_target(rt, m, TargetFormat::json);
  auto res = http_post(*target.externalValidatorUrl, payload, "application/ld+json", {}, timeout);
  if (!res) throw Error(errc::validator_unavailable, "no response from " + *target.externalValidatorUrl);
  if (res->status < 200 || res->status > 299)
    throw Error(errc::validator_unavailable, "validator answered HTTP " + std::to_string(res->status));

  auto malformed = [](const std::string& why) { return Error(errc::validator_malformed, "validator response: " + why); };
  Json body;
  try {
    body = parse_json(res->body);
  } catch (const Error&) {
    throw malformed("not JSON");
  }
  if (!body.is_object() || !body.contains("valid") || !body["valid"].is_boolean()) throw malformed("no boolean 'valid'");
  ExternalValidationResult out;
  out.valid = body["valid"].get<bool>();
  if (body.contains("messages")) {
    if (!body["messages"].is_array()) throw malformed("'messages' is not an array");
    for (const auto& item : body["messages"]) {
      if (!item.is_object()) throw malformed("message is not an object");
      ExternalMessage msg;
      for (auto [key, slot] : {std::pair{"path", &msg.path}, {"message", &msg.message}, {"severity", &msg.severity}}) {
        if (!item.contains(key) || !item[key].is_string()) throw malformed(std::string("message without string '") + key + "'");
        *slot = item[key].get<std::string>();
      }
      if (msg.severity != "error" && msg.severity != "warning") throw malformed("unknown severity '" + msg.severity + "'");
      out.messages.push_back(std::move(msg));
    }
  }
  if (out.valid && std::any_of(out.messages.begin(), out.messages.end(), [](const ExternalMessage& x) { return x.severity == "error"; }))
    throw malformed("valid=true with error messages");
  return out;
}

namespace {

constexpr std::size_t raw_response_limit = 64 * 1024;

std::string truncate_utf8(const std::string& text, std::size_t limit) {
  if (text.size() <= limit) return text;
  std::size_t end = limit;
  while (end > 0 && (static_cast<unsigned char>(text[end]) & 0xC0) == 0x80) --end;
  return text.substr(0, end);
}

}  // namespace

SubmissionReceipt submit(const SubmissionTarget& target, const ResolvedTemplate& rt, const MetadataInstance& m,
                         const ResourceId& instanceRecord, const ResourceId& actor, Repository& repo,
                         const MembershipOracle& membership, bool force, std::chrono::milliseconds timeout) {
  const char* credential = std::getenv(target.apiKeyEnvVar.c_str());
  if (credential == nullptr || *credential == '\0')
    throw Error(errc::missing_credential, "environment variable " + target.apiKeyEnvVar + " is not set");

  SubmissionReceipt receipt;
  receipt.targetName = target.name;
  receipt.forced = force;

  const ValidationReport report = validate(rt, m, membership);
  receipt.localValidation = report.valid;
  if (!report.valid && !force)
    throw DetailedError(errc::validation_failed, "instance fails local validation", "report", report_to_json(report));

  if (target.externalValidatorUrl) {
    try {
      const auto external = validate_external(target, rt, m, timeout);
      receipt.externalValidation = external.valid;
      if (!external.valid && !force)
        throw DetailedError(errc::external_validation_failed, "instance rejected by the external validator", "external",
                            external_result_to_json(external));
    } catch (const DetailedError&) {
      throw;
    } catch (const Error& e) {
      if (!force) throw;
      receipt.externalValidation.reset();
    }
  }

  const std::string payload = serialize_for_target(rt, m, target.format);
  const std::string content_type = target.format == TargetFormat::json ? "application/ld+json" : "text/tab-separated-values";
  receipt.submittedAt = now_rfc3339();
  auto res = http_post(target.endpointUrl, payload, content_type,
                       {{"Authorization", std::string("apikey token=") + credential}}, timeout);
  if (!res) throw Error(errc::submission_unavailable, "no response from " + target.endpointUrl);

  receipt.httpStatus = res->status;
  receipt.rawResponse = truncate_utf8(res->body, raw_response_limit);
  try {
    const Json body = parse_json(res->body);
    if (body.is_object() && body.contains("id") && body["id"].is_string()) receipt.remoteId = body["id"].get<std::string>();
  } catch (const Error&) {
  }

  ResourceRecord record;
  record.id = ResourceId::generate();
  record.resourceType = ResourceType::receipt;
  record.subject = instanceRecord;
  record.name = "receipt " + target.name;
  record.payload = receipt_to_json(receipt);
  repo.put_resource(std::move(record), std::nullopt, actor);

  if (res->status < 200 || res->status > 299)
    throw DetailedError(errc::submission_rejected, target.name + " answered HTTP " + std::to_string(res->status), "receipt",
                        receipt_to_json(receipt));
  return receipt;
}

}  // namespace metaforge
