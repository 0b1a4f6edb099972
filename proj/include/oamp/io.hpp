#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace oamp::io {

/// Reads a whole file. Every read in the library goes through here so the
/// read log below sees it.
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view contents);
void write_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& contents);

/// Read log for access audits (e.g. "training never opens oracle/").
void start_read_log();
std::vector<std::filesystem::path> stop_read_log();

}  // namespace oamp::io
