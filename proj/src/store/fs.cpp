#include "store/fs.hpp"

#include <unistd.h>

#include <atomic>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace fs = std::filesystem;

namespace vp {

fs::path staging_path(const fs::path& target) {
  static std::atomic<unsigned long> counter{0};
  fs::path t = target;
  if (!t.has_filename()) t = t.parent_path();
  const auto name = "." + t.filename().string() + ".tmp-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter.fetch_add(1));
  return t.parent_path() / name;
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = staging_path(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void publish_directory(const fs::path& staging, const fs::path& target) {
  std::error_code ec;
  fs::path t = target;
  if (!t.has_filename()) t = t.parent_path();
  if (fs::exists(t, ec)) {
    // rename(2) cannot replace a non-empty directory.
    const fs::path old = staging_path(t);
    fs::rename(t, old, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot replace " + t.string() + ": " + ec.message());
    fs::rename(staging, t, ec);
    if (ec) {
      fs::rename(old, t);
      throw Error(ErrorCode::kIo, "cannot publish " + t.string() + ": " + ec.message());
    }
    fs::remove_all(old, ec);
    return;
  }
  fs::rename(staging, t, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot publish " + t.string() + ": " + ec.message());
}

}  // namespace vp
