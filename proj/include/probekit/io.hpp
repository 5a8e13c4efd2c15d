// Copyright 2026 The probekit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace probekit {

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Splits on '\n', dropping a trailing '\r' and a final empty line.
std::vector<std::string> split_lines(std::string_view text);

std::vector<std::string> split_fields(std::string_view line, char separator);

// Shortest text that parses back to the same double.
std::string format_double(double value);

// Value rounded to two decimals, as used for percentage reports.
double round2(double value);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace probekit
