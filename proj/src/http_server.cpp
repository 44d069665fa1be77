#include "snp/http_server.hpp"

#include <spdlog/spdlog.h>

#include "httplib.h"
#include "snp/error.hpp"

namespace snp {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed:
    case ErrorCode::unsupported_format:
      return 400;
    case ErrorCode::unknown_token:
    case ErrorCode::unknown_participant:
    case ErrorCode::unknown_member:
    case ErrorCode::unknown_proposal:
    case ErrorCode::not_found:
      return 404;
    case ErrorCode::already_registered:
    case ErrorCode::staff_winner:
      return 409;
    case ErrorCode::invalid_argument:
    case ErrorCode::degenerate_table:
      return 422;
    case ErrorCode::corrupt_log:
    case ErrorCode::io:
      return 500;
  }
  return 500;
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, {{"error", std::string(to_string(code))}, {"message", message}}, http_status(code));
}

std::optional<std::string> visitor_cookie(const httplib::Request& req) {
  const std::string header = req.get_header_value("Cookie");
  const std::string key = std::string(kVisitorCookie) + "=";
  std::size_t pos = 0;
  while (pos < header.size()) {
    while (pos < header.size() && (header[pos] == ' ' || header[pos] == ';')) ++pos;
    const std::size_t end = std::min(header.find(';', pos), header.size());
    if (header.compare(pos, key.size(), key) == 0) {
      return header.substr(pos + key.size(), end - pos - key.size());
    }
    pos = end;
  }
  return std::nullopt;
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json body = json::parse(req.body);
    if (!body.is_object()) throw Error(ErrorCode::malformed, "request body must be a JSON object");
    return body;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::malformed, std::string("invalid JSON: ") + e.what());
  }
}

// Wraps a handler so domain errors become JSON error responses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      if (http_status(e.code()) >= 500) spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, ErrorCode::malformed, e.what());
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_json(res, {{"error", "internal"}, {"message", e.what()}}, 500);
    }
  };
}

}  // namespace

HttpServer::HttpServer(Contest& contest)
    : contest_(contest), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::install_routes() {
  auto& s = *server_;

  s.Get(R"(/r/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> country;
    if (req.has_param("country")) country = req.get_param_value("country");
    const auto r = contest_.handle_redirect(req.matches[1].str(), visitor_cookie(req), country);
    if (r.new_cookie) {
      const auto max_age = contest_.config().cookie_ttl_days * 86400;
      res.set_header("Set-Cookie", std::string(kVisitorCookie) + "=" + r.visitor +
                                       "; Max-Age=" + std::to_string(max_age) +
                                       "; Path=/; HttpOnly; SameSite=Lax");
    }
    res.set_header("Cache-Control", "no-store");
    res.set_redirect(contest_.config().landing_url, 302);
  }));

  s.Post("/api/links", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.contains("email") || !body["email"].is_string()) {
      throw Error(ErrorCode::malformed, "email is required");
    }
    const bool consent = body.value("consent", false);
    const auto link = contest_.handle_create_link(body["email"].get<std::string>(), visitor_cookie(req), consent);
    send_json(res, {{"token", link.token}, {"share_url", link.share_url}, {"created", link.created}},
              link.created ? 201 : 200);
  }));

  s.Post("/api/members", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, {{"member_id", contest_.handle_register_member(visitor_cookie(req))}}, 201);
  }));

  s.Get(R"(/api/participants/([^/]+)/classification)",
        guarded([this](const httplib::Request& req, httplib::Response& res) {
          send_json(res, contest_.handle_classification(req.matches[1].str()));
        }));

  s.Post("/api/payouts/preview", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.contains("winners") || !body["winners"].is_array()) {
      throw Error(ErrorCode::malformed, "winners must be an array of member ids");
    }
    const auto winners = body["winners"].get<std::vector<std::string>>();
    send_json(res, contest_.handle_payout_preview(winners, body.value("schedule", json())));
  }));

  s.Get(R"(/api/stats/([a-z0-9_]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, contest_.handle_stats(req.matches[1].str()));
  }));

  s.Get("/api/network", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string name = req.has_param("format") ? req.get_param_value("format") : "json";
    const GraphFormat format = parse_graph_format(name);
    const char* type = format == GraphFormat::dot       ? "text/vnd.graphviz"
                       : format == GraphFormat::graphml ? "application/xml"
                                                        : "application/json";
    res.set_content(contest_.handle_network(format), type);
  }));

  s.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"ok", true}, {"last_seq", contest_.last_seq()}});
  });
}

bool HttpServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

int HttpServer::bind_any(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpServer::serve() { return server_->listen_after_bind(); }

void HttpServer::stop() {
  if (server_) server_->stop();
}

void HttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace snp
