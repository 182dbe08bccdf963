#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace easyrl {

std::string base64Encode(const std::vector<std::uint8_t>& bytes);
// Throws a format error on characters outside the base64 alphabet.
std::vector<std::uint8_t> base64Decode(std::string_view text);

}  // namespace easyrl
