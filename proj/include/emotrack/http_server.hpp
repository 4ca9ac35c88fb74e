#pragma once

#include <memory>
#include <string>

#include "emotrack/service.hpp"

namespace httplib {
class Server;
}

namespace emotrack {

// cpp-httplib front end for Service. Every request, including unknown paths,
// is answered by Service::handle.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Blocks until stop(). Returns false when the address cannot be bound.
  bool listen(const std::string& host, int port);
  // Returns the bound port or -1.
  int bind_any_port(const std::string& host);
  // Blocks serving on a port bound with bind_any_port.
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  Service& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace emotrack
