#include "vulncur/audit_server.hpp"

#include <httplib.h>

#include "vulncur/error.hpp"
#include "vulncur/serialize.hpp"

namespace vulncur::audit {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

int status_for(Errc code) {
  switch (code) {
    case Errc::UnknownSample:
    case Errc::UnknownVote: return 404;
    case Errc::DuplicateVote:
    case Errc::UnresolvedSamples: return 409;
    case Errc::Io: return 500;
    default: return 400;
  }
}

void send_json(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, const Error& e) {
  send_json(res, status_for(e.code()),
            ordered_json{{"error", to_string(e.code())}, {"message", e.what()}});
}

/// Runs a handler, mapping library errors and malformed bodies to responses.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, Error(Errc::SchemaViolation, "body", std::nullopt, e.what()));
    } catch (const std::exception& e) {
      send_json(res, 500, ordered_json{{"error", "Internal"}, {"message", e.what()}});
    }
  };
}

ordered_json resolution_payload(const AuditStore& store, const std::string& sample_id) {
  auto payload = json_io::to_json(store.resolution(sample_id));
  payload["votes"] = store.votes(sample_id).size();
  payload["panel_size"] = store.panel_size();
  return payload;
}

}  // namespace

AuditServer::AuditServer(AuditStore& store, std::optional<std::filesystem::path> static_dir)
    : store_(store), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  // httplib defaults to SO_REUSEPORT, which lets a second server share the port
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  srv.Get("/samples", guarded([this](const httplib::Request& req, httplib::Response& res) {
            if (!req.has_param("annotator") || req.get_param_value("annotator").empty()) {
              throw Error(Errc::InvalidArgument, "annotator", std::nullopt,
                          "query parameter required");
            }
            auto next = store_.next_pending(req.get_param_value("annotator"));
            if (!next) {
              res.status = 204;
              return;
            }
            send_json(res, 200, json_io::to_json(*next));
          }));

  srv.Get(R"(/samples/([^/]+))",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            auto sample = store_.find(id);
            if (!sample) throw Error(Errc::UnknownSample, id);
            send_json(res, 200, json_io::to_json(*sample));
          }));

  srv.Post(R"(/samples/([^/]+)/votes)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             auto body = json::parse(req.body);
             if (!body.is_object()) throw Error(Errc::SchemaViolation, "body");
             body["sample_id"] = id;
             const auto vote = json_io::annotator_vote_from_json(body);
             store_.record_vote(vote);
             send_json(res, 201,
                       ordered_json{{"vote", json_io::to_json(vote)},
                                    {"resolution", resolution_payload(store_, id)}});
           }));

  srv.Put(R"(/samples/([^/]+)/votes/([^/]+))",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            auto body = json::parse(req.body);
            if (!body.is_object()) throw Error(Errc::SchemaViolation, "body");
            body["sample_id"] = id;
            body["annotator_id"] = std::string(req.matches[2]);
            const auto vote = json_io::annotator_vote_from_json(body);
            store_.revise_vote(vote);
            send_json(res, 200,
                      ordered_json{{"vote", json_io::to_json(vote)},
                                   {"resolution", resolution_payload(store_, id)}});
          }));

  srv.Get(R"(/samples/([^/]+)/resolution)",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, resolution_payload(store_, req.matches[1]));
          }));

  srv.Get("/resolutions", guarded([this](const httplib::Request&, httplib::Response& res) {
            ordered_json all = ordered_json::array();
            for (const auto& r : store_.resolutions()) all.push_back(json_io::to_json(r));
            send_json(res, 200, all);
          }));

  srv.Get("/report", guarded([this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, to_json(store_.report()));
          }));

  if (static_dir) srv.set_mount_point("/", static_dir->string());
}

AuditServer::~AuditServer() { stop(); }

int AuditServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(Errc::PortInUse, host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw Error(Errc::PortInUse, host + ":" + std::to_string(port));
  }
  return port;
}

void AuditServer::listen() { server_->listen_after_bind(); }

void AuditServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

}  // namespace vulncur::audit
