#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fjcal {

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;
[[nodiscard]] std::uint64_t fnv1a(std::span<const double> values) noexcept;

/// 16 lowercase hex digits.
[[nodiscard]] std::string hex64(std::uint64_t value);

/// Writes to `<path>.tmp` and renames over `path`. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

/// `# key: value` lines prepended to CSV outputs.
[[nodiscard]] std::string metadata_header(const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace fjcal
