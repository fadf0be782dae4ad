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

// Small text helpers shared by the file formats.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace affinity {

std::vector<std::string_view> Split(std::string_view text, char delimiter);

/// Splits off the first `count` fields at `delimiter`; the remainder (which
/// may itself contain the delimiter) becomes the last element. Returns
/// nullopt if fewer than `count` delimiters are present.
std::optional<std::vector<std::string_view>> SplitPrefix(std::string_view text,
                                                         char delimiter,
                                                         std::size_t count);

std::optional<std::int64_t> ParseInt64(std::string_view text);
std::optional<std::uint64_t> ParseUint64(std::string_view text);
std::optional<double> ParseDouble(std::string_view text);

/// Shortest representation that parses back to the same double.
std::string FormatDouble(double value);

std::uint32_t Crc32(std::string_view bytes);
std::string Crc32Hex(std::string_view bytes);

/// Reads a whole file; throws Error(kIOFailure) on failure.
std::string ReadFile(const std::string& path);
void WriteFile(const std::string& path, std::string_view contents);

/// `#<magic> v<version> <crc32 of body>\n<body>`.
std::string WrapChecksummed(std::string_view magic, int version, std::string_view body);
/// Returns the body after validating the first line. A missing or foreign
/// first line or another version raises Error(kFormatVersionMismatch); a
/// body whose checksum differs raises Error(kChecksumMismatch).
std::string_view UnwrapChecksummed(std::string_view magic, int version, std::string_view file);

}  // namespace affinity
