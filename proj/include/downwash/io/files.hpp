// File helpers: whole-file reads, atomic writes, hashing, number formatting.
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace downwash::io {

/// Reads a file into memory. Throws Error(data) when it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place, so
/// readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, std::string_view content);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

/// Strict double parse of a whole token. Throws Error(data) naming `what`.
double parse_double(std::string_view text, std::string_view what);
long parse_long(std::string_view text, std::string_view what);

}  // namespace downwash::io
