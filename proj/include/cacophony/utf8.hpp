#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace cacophony::utf8 {

/// Offset of the first byte that breaks well-formed UTF-8 (RFC 3629:
/// no overlongs, no surrogates, nothing above U+10FFFF), or npos.
std::size_t find_invalid(std::string_view s);

inline bool is_valid(std::string_view s) { return find_invalid(s) == std::string_view::npos; }

/// Number of Unicode scalar values. Assumes valid input.
std::size_t length(std::string_view s);

/// Decodes valid UTF-8 into scalar values.
std::u32string decode(std::string_view s);

/// Encodes scalar values back to UTF-8.
std::string encode(std::u32string_view s);

}  // namespace cacophony::utf8
