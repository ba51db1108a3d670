#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vulncur::jsonl {

/// One non-blank input line and its 1-based position in the file.
struct Line {
  std::size_t number;
  std::string text;
};

/// Splits text into non-blank lines (a trailing '\r' is stripped).
std::vector<Line> split_lines(const std::string& text);

/// Reads every non-blank line. Throws Error(Io) when the file cannot be read.
std::vector<Line> read_lines(const std::filesystem::path& path);

/// Parses one line; throws Error(MalformedLine, line) on invalid JSON.
nlohmann::json parse_line(const Line& line);

std::string read_file(const std::filesystem::path& path);

/// Writes `lines` joined by '\n' (with a trailing newline) atomically via a
/// temporary sibling file. Throws Error(Io).
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

template <typename Range, typename ToJson>
void write_jsonl(const std::filesystem::path& path, const Range& items, ToJson&& to_json) {
  std::vector<std::string> lines;
  for (const auto& item : items) lines.push_back(to_json(item).dump());
  write_lines(path, lines);
}

/// Pretty-printed JSON document followed by a newline.
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& doc);

}  // namespace vulncur::jsonl
