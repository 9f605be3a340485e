#pragma once

#include <string>
#include <string_view>

namespace reflex {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string base64_encode(std::string_view data);
/// Throws InvalidArgument on malformed input.
std::string base64_decode(std::string_view text);
/// "image/png", "image/jpeg", "image/webp" or "application/octet-stream".
std::string sniff_media_type(std::string_view bytes);

} // namespace reflex
