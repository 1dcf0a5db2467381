#pragma once

#include "metaforge/compiler.hpp"
#include "metaforge/jsonutil.hpp"
#include "metaforge/model.hpp"
#include "metaforge/repository.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace metaforge {

enum class TargetFormat { json, tsv };

struct SubmissionTarget {
  std::string name;
  std::string endpointUrl;
  TargetFormat format = TargetFormat::json;
  std::string apiKeyEnvVar;  // the credential itself never lives in the config
  std::optional<std::string> externalValidatorUrl;
};

/// Accepts {"targets": [...]} or a bare array. Throws MODEL_VIOLATION.
std::vector<SubmissionTarget> targets_from_json(const Json& doc);

/// Targets from the file named by METAFORGE_TARGETS, else
/// <data_dir>/targets.json, else none.
std::vector<SubmissionTarget> load_targets(const std::filesystem::path& data_dir);

struct ExternalMessage {
  std::string path;
  std::string message;
  std::string severity;  // "error" | "warning"
  bool operator==(const ExternalMessage&) const = default;
};

struct ExternalValidationResult {
  bool valid = true;
  std::vector<ExternalMessage> messages;
};

Json external_result_to_json(const ExternalValidationResult& r);

struct SubmissionReceipt {
  std::string targetName;
  std::string submittedAt;
  int httpStatus = 0;
  std::optional<std::string> remoteId;
  std::string rawResponse;  // at most 64 KiB
  bool forced = false;
  bool localValidation = false;
  std::optional<bool> externalValidation;  // absent when the target has no validator
  bool operator==(const SubmissionReceipt&) const = default;
};

Json receipt_to_json(const SubmissionReceipt& r);
SubmissionReceipt receipt_from_json(const Json& doc);

/// json: the canonical instance document. tsv: a header of leaf paths in
/// template order and one data row; repeated values joined by '|', terms
/// as `label [iri]`. Throws UNSERIALIZABLE for tsv deeper than 3 levels.
std::string serialize_for_target(const ResolvedTemplate& rt, const MetadataInstance& m, TargetFormat format);

inline constexpr std::chrono::seconds external_timeout{30};

/// Throws VALIDATOR_UNAVAILABLE or VALIDATOR_MALFORMED.
ExternalValidationResult validate_external(const SubmissionTarget& target, const ResolvedTemplate& rt,
                                           const MetadataInstance& m,
                                           std::chrono::milliseconds timeout = external_timeout);

/// Runs credential, local validation, external validation and the POST,
/// in that order. A receipt is stored under the instance whenever the
/// target answered.
///
/// Throws MISSING_CREDENTIAL, VALIDATION_FAILED, EXTERNAL_VALIDATION_FAILED
/// (unless force), VALIDATOR_*, SUBMISSION_UNAVAILABLE, SUBMISSION_REJECTED
/// (the stored receipt attached).
SubmissionReceipt submit(const SubmissionTarget& target, const ResolvedTemplate& rt, const MetadataInstance& m,
                         const ResourceId& instanceRecord, const ResourceId& actor, Repository& repo,
                         const MembershipOracle& membership, bool force,
                         std::chrono::milliseconds timeout = external_timeout);

}  // namespace metaforge
