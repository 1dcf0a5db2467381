#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace metaforge {

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;    // path and query, possibly empty
};

bool is_http_url(std::string_view url);

/// Splits an absolute http(s) URL; throws INVALID_ARGUMENT otherwise.
UrlParts split_url(std::string_view url);

/// `path?k=v&...` with percent-encoded values, in the given order.
std::string with_query(std::string path, const std::vector<std::pair<std::string, std::string>>& params);

struct HttpResult {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::multimap<std::string, std::string>;

/// Blocking requests. nullopt means no response arrived (connection
/// failure or timeout).
std::optional<HttpResult> http_get(const std::string& url, const HttpHeaders& headers,
                                   std::chrono::milliseconds timeout);
std::optional<HttpResult> http_post(const std::string& url, const std::string& body,
                                    const std::string& content_type, const HttpHeaders& headers,
                                    std::chrono::milliseconds timeout);

}  // namespace metaforge
