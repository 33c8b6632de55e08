#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace vp {

// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

std::array<std::uint8_t, 32> sha256(std::string_view data);

}  // namespace vp
