#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rlab::io {

std::string read_file(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);

// Writes to a sibling temp file and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace rlab::io
