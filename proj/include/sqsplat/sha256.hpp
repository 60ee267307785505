#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace sqsplat {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex_of_file(const std::filesystem::path& path);

}  // namespace sqsplat
