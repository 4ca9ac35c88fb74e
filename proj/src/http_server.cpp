#include "emotrack/http_server.hpp"

#include <httplib.h>

#include <cctype>

namespace emotrack {
namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

HttpServer::HttpServer(Service& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  // Catch-all routes rather than a pre-routing hook: httplib reads the
  // request body only for routed handlers.
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api;
    api.method = req.method;
    api.path = req.path;
    for (const auto& [k, v] : req.headers) api.headers[lower(k)] = v;
    api.query.insert(req.params.begin(), req.params.end());
    api.body = req.body;

    ApiResponse out = service_.handle(api);
    res.status = out.status;
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    if (!out.content_type.empty()) res.set_content(out.body, out.content_type);
  };
  const std::string any = ".*";
  server_->Get(any, forward);
  server_->Post(any, forward);
  server_->Put(any, forward);
  server_->Patch(any, forward);
  server_->Delete(any, forward);
  server_->Options(any, forward);
}

HttpServer::~HttpServer() = default;

bool HttpServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

int HttpServer::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return server_->listen_after_bind(); }

void HttpServer::stop() { server_->stop(); }

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace emotrack
