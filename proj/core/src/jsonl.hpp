// Copyright 2026 The dflute Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "dflute/errors.hpp"

namespace dflute::detail {

struct NumberedLine {
  std::size_t line_no;  // 1-based
  std::string text;
};

/// Non-blank lines of a text file. A trailing '\r' is dropped.
inline std::vector<NumberedLine> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<NumberedLine> lines;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back({n, std::move(line)});
  }
  if (in.bad()) throw IoError("read failed: " + path.string());
  return lines;
}

/// Writes `lines` with '\n' terminators via a temporary file and rename.
inline void write_lines_atomic(const std::filesystem::path& path,
                               const std::vector<std::string>& lines) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    for (const auto& l : lines) out << l << '\n';
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

class LineAppender {
 public:
  explicit LineAppender(const std::filesystem::path& path)
      : path_(path), out_(path, std::ios::binary | std::ios::app) {
    if (!out_) throw IoError("cannot append to " + path.string());
  }

  void append(const std::string& line) {
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace dflute::detail
