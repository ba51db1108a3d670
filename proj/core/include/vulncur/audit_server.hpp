#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "vulncur/audit.hpp"

namespace httplib {
class Server;
}

namespace vulncur::audit {

/// JSON HTTP front for an AuditStore.
///
///   GET  /samples?annotator=ID            next pending sample, 204 when none
///   GET  /samples/{id}                    sample payload
///   POST /samples/{id}/votes              {annotator_id, verdict, category}; 201, 409 on duplicate
///   PUT  /samples/{id}/votes/{annotator}  {verdict, category}; replaces a vote after discussion
///   GET  /samples/{id}/resolution         majority result over the stored votes
///   GET  /resolutions                     every sample's resolution
///   GET  /report                          accuracy report, 409 while samples are unresolved
///
/// Errors are {"error": <code>, "message": <text>} with 400/404/409, or 500
/// when the event log cannot be written. `static_dir`, when given, is served
/// at "/" for the annotation frontend.
class AuditServer {
 public:
  explicit AuditServer(AuditStore& store,
                       std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~AuditServer();

  AuditServer(const AuditServer&) = delete;
  AuditServer& operator=(const AuditServer&) = delete;

  /// Binds to host:port (port 0 picks a free port) and returns the bound
  /// port. Raises PortInUse.
  int bind(const std::string& host, int port);

  /// Serves until stop() is called.
  void listen();
  void stop();

 private:
  AuditStore& store_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace vulncur::audit
