#pragma once

// Internal helpers shared by the modules: UTF-8 scanning, ASCII case
// folding, file I/O and the seeded permutation used for splits and
// few-shot sampling.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace lexclass::detail {

struct CodePoint {
    char32_t value;
    std::size_t length;  // bytes consumed; invalid bytes decode as U+FFFD, length 1
};

CodePoint decode_utf8(std::string_view text, std::size_t pos);

bool is_space(char32_t cp);
bool is_punctuation(char32_t cp);

std::string ascii_lower(std::string_view s);
std::string_view trim(std::string_view s);
/// Lower-cased, trimmed, inner whitespace runs collapsed to one space.
std::string normalize_key(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);
/// Reads a plain-text list: one entry per line, '#' comments and blanks skipped.
std::vector<std::string> read_list_file(const std::filesystem::path& path);

/// Fisher-Yates permutation of [0, n) driven by mt19937_64. The bounded draw is
/// implemented here rather than via std::uniform_int_distribution so the
/// sequence is identical across standard libraries.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

}  // namespace lexclass::detail
