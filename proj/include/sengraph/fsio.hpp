#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace sengraph {

/// Shortest decimal form that round-trips the exact double. Keeps every
/// artifact byte-identical across runs and platforms.
std::string fmt_double(double x);

/// Parses a double, rejecting trailing garbage. Throws std::runtime_error.
double parse_double(std::string_view s);
std::int64_t parse_int(std::string_view s);

/// Whole-file read. Throws MissingArtifactError when the file is absent and
/// std::runtime_error on other failures.
std::string read_text_file(const std::filesystem::path& path);

/// Writes via a temporary file in the same directory followed by a rename, so
/// readers never observe a partially written artifact.
void atomic_write(const std::filesystem::path& path, std::string_view content);

}  // namespace sengraph
