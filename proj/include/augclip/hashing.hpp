#pragma once

#include <string>
#include <string_view>

namespace augclip {

// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

std::string base64_encode(std::string_view data);

}  // namespace augclip
