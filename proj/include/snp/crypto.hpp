#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace snp {

/// Base64url (no padding) encoding of `bytes` random bytes from the OpenSSL
/// CSPRNG. 16 bytes gives a 22-character, 128-bit token.
std::string random_token(std::size_t bytes = 16);

/// True for strings that could have come from random_token(16).
bool is_well_formed_token(std::string_view token);

std::string sha256_hex(std::string_view data);

/// Hash of the normalized (trimmed, lower-cased) address under a deployment salt.
std::string salted_email_hash(std::string_view salt, std::string_view email);

/// Loose syntactic check: one '@', dotted domain, no whitespace or control chars.
bool is_plausible_email(std::string_view email);

}  // namespace snp
