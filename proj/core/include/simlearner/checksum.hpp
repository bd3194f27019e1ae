#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace simlearner {

// 64-bit FNV-1a. Used for provenance tags (template and config checksums),
// never for security.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// 16 lowercase hex digits of fnv1a64(bytes).
std::string checksum_hex(std::string_view bytes);

}  // namespace simlearner
