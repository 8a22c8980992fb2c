// Copyright 2026 The ilba-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Minimal delimited-text I/O. Values are plain categorical codes; quoting
// is not supported and delimiter characters inside values are rejected at
// ingest time.

#ifndef ILBA_CSV_HPP_
#define ILBA_CSV_HPP_

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ilba/error.hpp"

namespace ilba {

struct DelimitedTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline void SplitLine(std::string_view line, char delim,
                      std::vector<std::string>& out) {
  out.clear();
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("read failure on: " + path);
  return std::move(buffer).str();
}

// Writes via a temp file in the same directory plus rename, so a crash
// never leaves a half-written artifact at `path`.
inline void WriteFileAtomic(const std::string& path,
                            std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + tmp);
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failure on: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " +
                        ec.message());
}

inline DelimitedTable ReadDelimited(const std::string& path,
                                    char delim = ',') {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path);
  DelimitedTable table;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) {
      break;  // trailing newline
    }
    SplitLine(line, delim, fields);
    if (first) {
      table.header = fields;
      first = false;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ValidationError("line " + std::to_string(line_no) + " of " +
                            path + " has " + std::to_string(fields.size()) +
                            " fields, expected " +
                            std::to_string(table.header.size()));
    }
    table.rows.push_back(fields);
  }
  if (in.bad()) throw IoError("read failure on: " + path);
  if (first) throw ValidationError("file has no header line: " + path);
  return table;
}

inline std::uint64_t ParseCount(std::string_view text,
                                const std::string& context) {
  std::uint64_t value = 0;
  const auto* begin = text.data();
  const auto* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ValidationError("expected a non-negative integer for " + context +
                          ", got '" + std::string(text) + "'");
  }
  return value;
}

inline std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string ToHex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

}  // namespace ilba

#endif  // ILBA_CSV_HPP_
