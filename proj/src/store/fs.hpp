#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace vp {

// Unique sibling path for staging a write to `target`.
std::filesystem::path staging_path(const std::filesystem::path& target);

// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

std::string read_file(const std::filesystem::path& path);

// Moves a fully written staging directory into place, replacing `target`.
void publish_directory(const std::filesystem::path& staging, const std::filesystem::path& target);

}  // namespace vp
