#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "metadesign/microstructure.hpp"

namespace metadesign {

/// Row-major bit packing, most-significant bit first, each row padded to a
/// whole byte.
std::vector<std::uint8_t> pack_bits(const Microstructure& m);
Microstructure unpack_bits(const std::vector<std::uint8_t>& bytes, int height, int width);

std::string base64_encode(const std::vector<std::uint8_t>& bytes);
/// Throws FormatError on invalid characters or length.
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string encode_bitmap(const Microstructure& m);
Microstructure decode_bitmap(std::string_view text, int height, int width);

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 1469598103934665603ULL);
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 1469598103934665603ULL) {
    return fnv1a64(s.data(), s.size(), seed);
}

/// Stable hash of the geometry (dimensions + packed cells).
std::uint64_t bitmap_hash(const Microstructure& m);

}  // namespace metadesign
