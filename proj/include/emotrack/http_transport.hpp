#pragma once

#include <chrono>
#include <map>
#include <string>

namespace emotrack {

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpParams = std::multimap<std::string, std::string>;
using HttpHeaders = std::multimap<std::string, std::string>;

// Outbound HTTP used by external adapters. Injected so tests can run without
// network access. Implementations throw Error(kUpstream) when no response
// could be obtained; non-2xx responses are returned, not thrown.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse get(const std::string& path, const HttpParams& params,
                           const HttpHeaders& headers) = 0;
};

// cpp-httplib client. base_url is "scheme://host[:port]".
class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(std::string base_url,
                            std::chrono::milliseconds timeout = std::chrono::seconds(10));

  HttpResponse get(const std::string& path, const HttpParams& params,
                   const HttpHeaders& headers) override;

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

}  // namespace emotrack
