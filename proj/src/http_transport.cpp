// CPPHTTPLIB_OPENSSL_SUPPORT is defined by the build when OpenSSL is available.
#include <httplib.h>

#include "evotext/provider.hpp"

namespace evotext {

namespace {

// Splits "scheme://host[:port]/path" into the client base and request path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpTransport default_http_transport() {
  return [](const HttpRequest& req) -> HttpResult {
    auto [base, path] = split_url(req.url);
    httplib::Client client(base);
    client.set_connection_timeout(0, req.timeout_ms * 1000LL);
    client.set_read_timeout(0, req.timeout_ms * 1000LL);
    client.set_write_timeout(0, req.timeout_ms * 1000LL);

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [key, value] : req.headers) {
      if (key == "Content-Type") {
        content_type = value;
      } else {
        headers.emplace(key, value);
      }
    }

    auto result = client.Post(path, headers, req.body, content_type);
    HttpResult out;
    if (!result) {
      out.transport_error = true;
      out.timed_out = result.error() == httplib::Error::ConnectionTimeout ||
                      result.error() == httplib::Error::Read ||
                      result.error() == httplib::Error::Write;
      out.error = httplib::to_string(result.error());
      return out;
    }
    out.status = result->status;
    out.body = result->body;
    return out;
  };
}

}  // namespace evotext
