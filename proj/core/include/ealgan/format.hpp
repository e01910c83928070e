#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ealgan {

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
// Fixed number of decimals, for human-facing report tables.
std::string format_fixed(double v, int decimals);

// 16 lowercase hex digits of the IEEE-754 bit pattern, and its inverse.
std::string double_to_hex(double v);
double double_from_hex(std::string_view hex);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace ealgan
