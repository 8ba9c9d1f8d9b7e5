#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mobflow/error.hpp"

namespace mobflow::io {

namespace fs = std::filesystem;

// Splits one delimited line. Fields are plain (no quoting); surrounding
// whitespace and a trailing '\r' are trimmed.
inline std::vector<std::string_view> split_fields(std::string_view line, char delim = ',') {
  std::vector<std::string_view> out;
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Reads a header-bearing delimited file, checks the header against the
// expected column names and invokes `on_row(line_number, fields)` per data
// row. Blank lines are ignored.
inline void read_delimited(const fs::path& path, const std::vector<std::string_view>& expected_header,
                           const std::function<void(std::size_t, const std::vector<std::string_view>&)>& on_row) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open '" + path.string() + "'");
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    if (!header_seen) {
      header_seen = true;
      if (fields != expected_header) {
        std::string want;
        for (auto h : expected_header) want += (want.empty() ? "" : ",") + std::string(h);
        throw SchemaVersionError("unexpected header in '" + path.string() + "', expected '" + want + "'");
      }
      continue;
    }
    on_row(line_no, fields);
  }
  if (!header_seen) throw SchemaVersionError("'" + path.string() + "' is empty (missing header)");
}

// Writes `content` to a sibling temporary file and renames it into place,
// so readers observe either the old or the new file.
inline void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("write failed for '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Shortest representation that round-trips a double through text.
inline std::string format_real(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

// FNV-1a, used for content checksums in manifests.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 14695981039346656037ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << v;
  return ss.str();
}

}  // namespace mobflow::io
