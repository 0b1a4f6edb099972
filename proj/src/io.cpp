#include "oamp/io.hpp"

#include <fstream>
#include <iterator>
#include <mutex>
#include <optional>

#include "oamp/errors.hpp"

namespace oamp::io {
namespace {

std::mutex g_log_mutex;
std::optional<std::vector<std::filesystem::path>> g_read_log;

void record(const std::filesystem::path& path) {
  std::lock_guard lock(g_log_mutex);
  if (g_read_log) g_read_log->push_back(path);
}

}  // namespace

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  record(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::filesystem::path& path) {
  auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

void write_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw ValidationError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_atomic(const std::filesystem::path& path, const std::vector<std::uint8_t>& contents) {
  write_atomic(path, std::string_view(reinterpret_cast<const char*>(contents.data()), contents.size()));
}

void start_read_log() {
  std::lock_guard lock(g_log_mutex);
  g_read_log.emplace();
}

std::vector<std::filesystem::path> stop_read_log() {
  std::lock_guard lock(g_log_mutex);
  auto out = g_read_log.value_or(std::vector<std::filesystem::path>{});
  g_read_log.reset();
  return out;
}

}  // namespace oamp::io
