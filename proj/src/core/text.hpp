#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vp {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Lowercased with all whitespace and underscores removed; the key used for
// case- and whitespace-insensitive class-name matching.
std::string match_key(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

// Strips list decorations an LLM tends to emit: "- ", "* ", "1. ", "2) ",
// surrounding quotes and markdown emphasis.
std::string strip_list_marker(std::string_view s);

// One field of an RFC-4180 CSV record.
std::string csv_field(std::string_view s);

// Replaces characters unsafe in file names with '_'.
std::string file_safe(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace vp
