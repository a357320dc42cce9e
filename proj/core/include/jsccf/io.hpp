#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace jsccf {

// Writes to a sibling temporary file, then renames it over `path`.
void atomic_write_file(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);

// Commit and content digest of the library sources this binary was built from.
std::string code_version();

}  // namespace jsccf
