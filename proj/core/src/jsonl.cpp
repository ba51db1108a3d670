#include "vulncur/jsonl.hpp"

#include <fstream>
#include <sstream>

#include "vulncur/error.hpp"

namespace vulncur::jsonl {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, path.string(), std::nullopt, "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(Errc::Io, path.string(), std::nullopt, "read failed");
  return std::move(buf).str();
}

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++number;
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) {
      lines.push_back({number, std::move(line)});
    }
    pos = end + 1;
  }
  return lines;
}

std::vector<Line> read_lines(const fs::path& path) { return split_lines(read_file(path)); }

nlohmann::json parse_line(const Line& line) {
  try {
    return nlohmann::json::parse(line.text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::MalformedLine, {}, line.number, e.what());
  }
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, tmp.string(), std::nullopt, "cannot open for writing");
    for (const auto& line : lines) out << line << '\n';
    out.flush();
    if (!out) throw Error(Errc::Io, tmp.string(), std::nullopt, "write failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::Io, path.string(), std::nullopt, ec.message());
}

void write_json(const fs::path& path, const nlohmann::ordered_json& doc) {
  write_lines(path, {doc.dump(2)});
}

}  // namespace vulncur::jsonl
