#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace molforge::io {

std::string read_file(const std::filesystem::path& path);

// Lines without their terminators; a trailing "\r" is dropped as well.
std::vector<std::string> split_lines(std::string_view text);

std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> split(std::string_view text, char sep);

std::string_view trim(std::string_view text);

std::string to_lower(std::string_view text);

}  // namespace molforge::io
