#pragma once

#include <cstddef>
#include <string>

namespace aberrasim {

/// SHA-256 digest as lowercase hex.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& bytes);

/// Digest of a file's contents, streamed; throws std::runtime_error if
/// the file cannot be read.
std::string sha256_file_hex(const std::string& path);

}  // namespace aberrasim
