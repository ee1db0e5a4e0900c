#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace lexclass {

/// 64-bit FNV-1a as 16 hex digits; used for stable request ids.
std::string fnv1a_hex(std::string_view data);

/// SHA-256 as 64 hex digits; used for input digests in run manifests.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace lexclass
