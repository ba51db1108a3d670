#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vulncur/pipeline.hpp"

namespace vulncur::cli {

struct AuditSettings {
  std::size_t sample_size = 50;
  std::uint64_t seed = 0;
  std::size_t panel_size = 3;
  std::filesystem::path state = "audit.jsonl";
  std::string host = "127.0.0.1";
  int port = 8080;
};

struct ToolConfig {
  pipeline::Config pipeline;
  AuditSettings audit;
};

/// Reads a TOML config. Relative paths resolve against the file's directory.
/// Unknown tables or keys raise Error(SchemaViolation); an unreadable file
/// raises Error(Io).
ToolConfig load_config(const std::filesystem::path& path);

/// Applies TOML text on top of `base`.
ToolConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                        ToolConfig base = {});

enum ExitCode : int { kOk = 0, kValidationError = 1, kIoError = 2 };

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vulncur::cli
