#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace guirl {

// 64-bit FNV-1a. Stable across platforms and compilers, unlike std::hash.
std::uint64_t fnv1a64(std::string_view bytes);

// Lower-case, zero-padded 16 character hex rendering of fnv1a64(bytes).
std::string digest_hex(std::string_view bytes);

std::string base64_encode(std::string_view bytes);

// SplitMix64 finalizer, used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t value);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Case-insensitive substring test.
bool contains_ci(std::string_view haystack, std::string_view needle);

}  // namespace guirl
