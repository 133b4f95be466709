#pragma once

#include <atomic>
#include <memory>
#include <string>

// Eigen before httplib: <resolv.h> defines a `_res` macro that collides with Eigen parameter names.
#include "fd4qc/service.hpp"

// the stock backlog of 5 drops connections under bursts of concurrent clients
#ifndef CPPHTTPLIB_LISTEN_BACKLOG
#define CPPHTTPLIB_LISTEN_BACKLOG 1024
#endif
#include "httplib.h"
#include "json.hpp"

namespace fd4qc::service {

inline int http_status(Errc code) {
  switch (code) {
    case Errc::UnknownModel: return 404;
    case Errc::SchemaMismatch:
    case Errc::DimensionMismatch:
    case Errc::WidthMismatch: return 422;
    case Errc::BadRequest:
    case Errc::BadNumber:
    case Errc::BadTimestamp:
    case Errc::BadLabel:
    case Errc::BadAlpha: return 400;
    default: return 500;
  }
}

inline json error_body(const std::string& code, const std::string& message, const std::string& request_id) {
  return {{"error", {{"code", code}, {"message", message}}},
          {"request_id", request_id.empty() ? json(nullptr) : json(request_id)}};
}

/// POST /v1/predict, GET /v1/models, GET /v1/health over one Service.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<const Service> svc) : svc_(std::move(svc)) {
    server_.Post("/v1/predict", [this](const httplib::Request& req, httplib::Response& res) { predict(req, res); });
    server_.Get("/v1/models", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"models", svc_->models_json()}});
    });
    server_.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, svc_->health_json());
    });
  }

  /// Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port) {
    if (port == 0) return server_.bind_to_any_port(host.c_str());
    return server_.bind_to_port(host.c_str(), port) ? port : -1;
  }

  bool listen() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  void predict(const httplib::Request& http_req, httplib::Response& res) {
    std::string request_id;
    try {
      json body;
      try {
        body = json::parse(http_req.body);
      } catch (const json::exception& e) {
        throw Error(Errc::BadRequest, std::string("body is not valid JSON: ") + e.what());
      }
      if (body.is_object() && body.contains("request_id") && body["request_id"].is_string()) {
        request_id = body["request_id"].get<std::string>();
      }
      PredictRequest req = request_from_json(body);
      if (req.request_id.empty()) req.request_id = request_id = "req-" + std::to_string(++counter_);
      reply(res, 200, to_json(svc_->predict(req)));
    } catch (const Error& e) {
      reply(res, http_status(e.code()), error_body(std::string(to_string(e.code())), e.detail(), request_id));
    } catch (const std::exception& e) {
      reply(res, 500, error_body("Internal", e.what(), request_id));
    }
  }

  std::shared_ptr<const Service> svc_;
  httplib::Server server_;
  std::atomic<std::uint64_t> counter_{0};
};

}  // namespace fd4qc::service
