// Copyright 2026 The Affinity Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "affinity/text.h"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "affinity/status.h"

namespace affinity {

std::vector<std::string_view> Split(std::string_view text, char delimiter) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(delimiter, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::optional<std::vector<std::string_view>> SplitPrefix(std::string_view text,
                                                         char delimiter,
                                                         std::size_t count) {
  std::vector<std::string_view> parts;
  parts.reserve(count + 1);
  std::size_t start = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t pos = text.find(delimiter, start);
    if (pos == std::string_view::npos) return std::nullopt;
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  parts.push_back(text.substr(start));
  return parts;
}

namespace {

template <typename T>
std::optional<T> ParseIntegral(std::string_view text) {
  if (text.empty()) return std::nullopt;
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

}  // namespace

std::optional<std::int64_t> ParseInt64(std::string_view text) {
  return ParseIntegral<std::int64_t>(text);
}

std::optional<std::uint64_t> ParseUint64(std::string_view text) {
  return ParseIntegral<std::uint64_t>(text);
}

std::optional<double> ParseDouble(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

std::string FormatDouble(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, ptr);
}

std::uint32_t Crc32(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large inputs in chunks.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t chunk = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + offset),
                static_cast<uInt>(chunk));
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::string Crc32Hex(std::string_view bytes) {
  char buffer[9];
  std::snprintf(buffer, sizeof(buffer), "%08x", Crc32(bytes));
  return buffer;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIOFailure, "cannot open " + path);
  std::ostringstream contents;
  contents << in.rdbuf();
  if (in.bad()) Fail(ErrorCode::kIOFailure, "read failed: " + path);
  return contents.str();
}

void WriteFile(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIOFailure, "cannot open " + path + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) Fail(ErrorCode::kIOFailure, "write failed: " + path);
}

std::string WrapChecksummed(std::string_view magic, int version, std::string_view body) {
  std::string out = "#";
  out += magic;
  out += " v" + std::to_string(version) + " " + Crc32Hex(body) + "\n";
  out += body;
  return out;
}

std::string_view UnwrapChecksummed(std::string_view magic, int version, std::string_view file) {
  const std::size_t newline = file.find('\n');
  if (newline == std::string_view::npos) {
    Fail(ErrorCode::kFormatVersionMismatch, "missing header line");
  }
  const std::vector<std::string_view> parts = Split(file.substr(0, newline), ' ');
  if (parts.size() != 3 || parts[0].size() != magic.size() + 1 || parts[0][0] != '#' ||
      parts[0].substr(1) != magic) {
    Fail(ErrorCode::kFormatVersionMismatch, "not a " + std::string(magic) + " file");
  }
  if (parts[1] != "v" + std::to_string(version)) {
    Fail(ErrorCode::kFormatVersionMismatch,
         "unsupported version " + std::string(parts[1]) + " (expected v" +
             std::to_string(version) + ")");
  }
  std::string_view body = file.substr(newline + 1);
  if (parts[2] != Crc32Hex(body)) {
    Fail(ErrorCode::kChecksumMismatch, "body checksum " + Crc32Hex(body) + " does not match " +
                                           std::string(parts[2]));
  }
  return body;
}

}  // namespace affinity
