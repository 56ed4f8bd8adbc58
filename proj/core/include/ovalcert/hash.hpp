#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ovalcert {

// Lowercase hexadecimal SHA-256 digests.
std::string sha256_hex(std::string_view data);
// Throws std::runtime_error if the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace ovalcert
