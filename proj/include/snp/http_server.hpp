#pragma once

// HTTP surface of the contest service.

#include <memory>
#include <string>

#include "snp/contest.hpp"
#include "snp/error.hpp"

namespace httplib {
class Server;
}

namespace snp {

/// HTTP status for a failed request.
int http_status(ErrorCode code);

class HttpServer {
 public:
  explicit HttpServer(Contest& contest);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and serves until stop(). Returns false when the bind fails.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it (or -1); call serve() afterwards.
  int bind_any(const std::string& host);
  bool serve();
  void stop();
  void wait_until_ready() const;

 private:
  void install_routes();

  Contest& contest_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace snp
