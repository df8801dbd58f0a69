#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace faae {

/// Shortest round-trip decimal form of a double (std::to_chars).
std::string real_to_string(double value);
void append_real(std::string& out, double value);

/// FNV-1a 64-bit hash, used to fingerprint split membership.
std::uint64_t fnv1a64(std::string_view bytes);

std::string to_hex(std::uint64_t value);

}  // namespace faae
