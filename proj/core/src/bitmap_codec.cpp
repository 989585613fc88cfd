#include "metadesign/bitmap_codec.hpp"

#include <array>

#include "metadesign/error.hpp"

namespace metadesign {

namespace {

constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::size_t row_bytes(int width) { return (static_cast<std::size_t>(width) + 7) / 8; }

}  // namespace

std::vector<std::uint8_t> pack_bits(const Microstructure& m) {
    const std::size_t stride = row_bytes(m.width());
    std::vector<std::uint8_t> out(stride * static_cast<std::size_t>(m.height()), 0);
    for (int r = 0; r < m.height(); ++r)
        for (int c = 0; c < m.width(); ++c)
            if (m(r, c))
                out[static_cast<std::size_t>(r) * stride + static_cast<std::size_t>(c) / 8] |=
                    static_cast<std::uint8_t>(0x80u >> (c % 8));
    return out;
}

Microstructure unpack_bits(const std::vector<std::uint8_t>& bytes, int height, int width) {
    const std::size_t stride = row_bytes(width);
    if (bytes.size() != stride * static_cast<std::size_t>(height))
        throw FormatError("bitmap byte count does not match dimensions");
    Microstructure m(height, width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c)
            m(r, c) = (bytes[static_cast<std::size_t>(r) * stride + static_cast<std::size_t>(c) / 8] >> (7 - c % 8)) & 1u;
    return m;
}

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += kAlphabet[v & 63];
    }
    const std::size_t rest = bytes.size() - i;
    if (rest == 1) {
        const std::uint32_t v = std::uint32_t{bytes[i]} << 16;
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
        out += kAlphabet[(v >> 18) & 63];
        out += kAlphabet[(v >> 12) & 63];
        out += kAlphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
    static const std::array<int, 256> table = [] {
        std::array<int, 256> t{};
        t.fill(-1);
        for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(kAlphabet[i])] = i;
        return t;
    }();
    if (text.size() % 4 != 0) throw FormatError("base64 length is not a multiple of 4");
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    for (std::size_t i = 0; i < text.size(); i += 4) {
        int pad = 0;
        std::uint32_t v = 0;
        for (std::size_t k = 0; k < 4; ++k) {
            const char ch = text[i + k];
            if (ch == '=') {
                if (i + 4 != text.size() || k < 2) throw FormatError("misplaced base64 padding");
                ++pad;
                v <<= 6;
                continue;
            }
            if (pad) throw FormatError("misplaced base64 padding");
            const int d = table[static_cast<unsigned char>(ch)];
            if (d < 0) throw FormatError("invalid base64 character");
            v = (v << 6) | static_cast<std::uint32_t>(d);
        }
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
    }
    return out;
}

std::string encode_bitmap(const Microstructure& m) { return base64_encode(pack_bits(m)); }

Microstructure decode_bitmap(std::string_view text, int height, int width) {
    return unpack_bits(base64_decode(text), height, width);
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t bitmap_hash(const Microstructure& m) {
    const std::int32_t dims[2] = {m.height(), m.width()};
    const auto packed = pack_bits(m);
    return fnv1a64(packed.data(), packed.size(), fnv1a64(dims, sizeof dims));
}

}  // namespace metadesign
