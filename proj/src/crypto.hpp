#pragma once

#include <optional>
#include <string>
#include <string_view>

// OpenSSL-backed helpers shared by token and webhook verification.
namespace emotrack::crypto {

std::string hmac_sha256(std::string_view key, std::string_view data);
std::string hmac_sha1(std::string_view key, std::string_view data);

std::string base64_encode(std::string_view in);
std::string base64url_encode(std::string_view in);
std::optional<std::string> base64url_decode(std::string_view in);

bool constant_time_equal(std::string_view a, std::string_view b);

}  // namespace emotrack::crypto
