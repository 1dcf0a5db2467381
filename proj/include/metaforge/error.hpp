#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace metaforge {

/// Error codes shared across modules. They are also the wire values of the
/// `error` member in REST error bodies and CLI stderr objects.
namespace errc {
inline constexpr std::string_view malformed_json = "MALFORMED_JSON";
inline constexpr std::string_view model_violation = "MODEL_VIOLATION";
inline constexpr std::string_view unresolved_reference = "UNRESOLVED_REFERENCE";
inline constexpr std::string_view cycle_detected = "CYCLE_DETECTED";
inline constexpr std::string_view no_property_iri = "NO_PROPERTY_IRI";

inline constexpr std::string_view empty_query = "EMPTY_QUERY";
inline constexpr std::string_view terminology_unavailable = "TERMINOLOGY_UNAVAILABLE";
inline constexpr std::string_view unknown_term = "UNKNOWN_TERM";
inline constexpr std::string_view branch_too_large = "BRANCH_TOO_LARGE";
inline constexpr std::string_view duplicate_label = "DUPLICATE_LABEL";
inline constexpr std::string_view duplicate_member = "DUPLICATE_MEMBER";
inline constexpr std::string_view invalid_argument = "INVALID_ARGUMENT";

inline constexpr std::string_view template_mismatch = "TEMPLATE_MISMATCH";
inline constexpr std::string_view invalid_context = "INVALID_CONTEXT";

inline constexpr std::string_view permission_denied = "PERMISSION_DENIED";
inline constexpr std::string_view version_conflict = "VERSION_CONFLICT";
inline constexpr std::string_view invalid_payload = "INVALID_PAYLOAD";
inline constexpr std::string_view missing_parent = "MISSING_PARENT";
inline constexpr std::string_view not_found = "NOT_FOUND";
inline constexpr std::string_view cyclic_move = "CYCLIC_MOVE";
inline constexpr std::string_view owner_immutable = "OWNER_IMMUTABLE";
inline constexpr std::string_view referenced = "REFERENCED";
inline constexpr std::string_view folder_not_empty = "FOLDER_NOT_EMPTY";
inline constexpr std::string_view invalid_query = "INVALID_QUERY";
inline constexpr std::string_view storage_failure = "STORAGE_FAILURE";

inline constexpr std::string_view unserializable = "UNSERIALIZABLE";
inline constexpr std::string_view validator_unavailable = "VALIDATOR_UNAVAILABLE";
inline constexpr std::string_view validator_malformed = "VALIDATOR_MALFORMED";
inline constexpr std::string_view submission_unavailable = "SUBMISSION_UNAVAILABLE";
inline constexpr std::string_view submission_rejected = "SUBMISSION_REJECTED";
inline constexpr std::string_view missing_credential = "MISSING_CREDENTIAL";
inline constexpr std::string_view validation_failed = "VALIDATION_FAILED";
inline constexpr std::string_view external_validation_failed = "EXTERNAL_VALIDATION_FAILED";
inline constexpr std::string_view unknown_target = "UNKNOWN_TARGET";

inline constexpr std::string_view unauthenticated = "UNAUTHENTICATED";
inline constexpr std::string_view route_not_found = "ROUTE_NOT_FOUND";
inline constexpr std::string_view method_not_allowed = "METHOD_NOT_ALLOWED";
inline constexpr std::string_view io_error = "IO_ERROR";
}  // namespace errc

/// Exception carrying a stable error code, a message and an optional
/// JSON-Pointer-style path into the offending document.
class Error : public std::runtime_error {
 public:
  Error(std::string_view code, std::string message, std::string path = {},
        std::vector<std::string> ids = {});

  const std::string& code() const noexcept { return code_; }
  const std::string& path() const noexcept { return path_; }
  // Identifiers attached to the error (the id list of a detected cycle).
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::string code_;
  std::string path_;
  std::vector<std::string> ids_;
};

/// An Error with a structured attachment (a validation report, a receipt)
/// that callers surface under `key`.
class DetailedError : public Error {
 public:
  DetailedError(std::string_view code, std::string message, std::string key, nlohmann::ordered_json details)
      : Error(code, std::move(message)), key_(std::move(key)), details_(std::move(details)) {}

  const std::string& key() const noexcept { return key_; }
  const nlohmann::ordered_json& details() const noexcept { return details_; }

 private:
  std::string key_;
  nlohmann::ordered_json details_;
};

}  // namespace metaforge
