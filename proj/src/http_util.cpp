#include "metaforge/http_util.hpp"

#include "metaforge/error.hpp"
#include "metaforge/text.hpp"

#include <httplib.h>

namespace metaforge {

bool is_http_url(std::string_view url) {
  const bool http = url.starts_with("http://") || url.starts_with("https://");
  if (!http) return false;
  const auto rest = url.substr(url.find("//") + 2);
  return !rest.empty() && rest.front() != '/';
}

UrlParts split_url(std::string_view url) {
  if (!is_http_url(url)) throw Error(errc::invalid_argument, "not an absolute http(s) URL: " + std::string(url));
  const auto host_start = url.find("//") + 2;
  const auto path_start = url.find_first_of("/?", host_start);
  if (path_start == std::string_view::npos) return {std::string(url), ""};
  return {std::string(url.substr(0, path_start)), std::string(url.substr(path_start))};
}

std::string with_query(std::string path, const std::vector<std::pair<std::string, std::string>>& params) {
  char sep = path.find('?') == std::string::npos ? '?' : '&';
  for (const auto& [key, value] : params) {
    path.push_back(sep);
    path += percent_encode(key);
    path.push_back('=');
    path += percent_encode(value);
    sep = '&';
  }
  return path;
}

namespace {

httplib::Client make_client(const UrlParts& parts, std::chrono::milliseconds timeout) {
  httplib::Client client(parts.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  return client;
}

httplib::Headers to_headers(const HttpHeaders& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

std::string request_path(const UrlParts& parts) { return parts.path.empty() ? "/" : parts.path; }

}  // namespace

std::optional<HttpResult> http_get(const std::string& url, const HttpHeaders& headers,
                                   std::chrono::milliseconds timeout) {
  const UrlParts parts = split_url(url);
  auto client = make_client(parts, timeout);
  auto res = client.Get(request_path(parts), to_headers(headers));
  if (!res) return std::nullopt;
  return HttpResult{res->status, res->body};
}

std::optional<HttpResult> http_post(const std::string& url, const std::string& body,
                                    const std::string& content_type, const HttpHeaders& headers,
                                    std::chrono::milliseconds timeout) {
  const UrlParts parts = split_url(url);
  auto client = make_client(parts, timeout);
  auto res = client.Post(request_path(parts), to_headers(headers), body, content_type);
  if (!res) return std::nullopt;
  return HttpResult{res->status, res->body};
}

}  // namespace metaforge
