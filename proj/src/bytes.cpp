#include "rln/bytes.hpp"

#include "rln/errors.hpp"

namespace rln {

std::string to_hex(ByteView data) {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (auto b : data) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0f]);
    }
    return out;
}

namespace {
int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

std::optional<Bytes> from_hex(std::string_view hex) {
    if (hex.starts_with("0x") || hex.starts_with("0X")) hex.remove_prefix(2);
    if (hex.size() % 2 != 0) return std::nullopt;
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = nibble(hex[2 * i]);
        int lo = nibble(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

void ByteWriter::put_u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::put_u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

ByteView ByteReader::get_raw(std::size_t n) {
    if (remaining() < n) {
        throw Error(Errc::Decode, "need " + std::to_string(n) + " bytes, have " + std::to_string(remaining()));
    }
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::uint8_t ByteReader::get_u8() { return get_raw(1)[0]; }

std::uint32_t ByteReader::get_u32() {
    std::uint32_t v = 0;
    for (auto b : get_raw(4)) v = (v << 8) | b;
    return v;
}

std::uint64_t ByteReader::get_u64() {
    std::uint64_t v = 0;
    for (auto b : get_raw(8)) v = (v << 8) | b;
    return v;
}

ByteView ByteReader::get_prefixed() {
    auto n = get_u64();
    if (n > remaining()) throw Error(Errc::Decode, "length prefix exceeds input");
    return get_raw(static_cast<std::size_t>(n));
}

}  // namespace rln
