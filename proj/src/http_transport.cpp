#include "emotrack/http_transport.hpp"

#include <httplib.h>

#include "emotrack/error.hpp"

namespace emotrack {

HttplibTransport::HttplibTransport(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

HttpResponse HttplibTransport::get(const std::string& path, const HttpParams& params,
                                   const HttpHeaders& headers) {
  httplib::Client client(base_url_);
  if (!client.is_valid()) throw Error(ErrorCode::kUpstream, "invalid upstream URL '" + base_url_ + "'");
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Params p(params.begin(), params.end());
  httplib::Headers h(headers.begin(), headers.end());
  auto res = client.Get(path, p, h);
  if (!res) {
    throw Error(ErrorCode::kUpstream,
                "GET " + base_url_ + path + " failed: " + httplib::to_string(res.error()));
  }
  return HttpResponse{res->status, res->body};
}

}  // namespace emotrack
