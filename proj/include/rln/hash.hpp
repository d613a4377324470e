#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <variant>

#include "rln/bytes.hpp"
#include "rln/field.hpp"

namespace rln {

// Reserved domain-separation tags; the tag is the first byte hashed.
enum class Domain : std::uint8_t {
    Commitment = 0x01,
    Msg = 0x02,
    Coeff = 0x03,
    Nullifier = 0x04,
    SlashCommit = 0x05,
};

// One hash input. Field elements are absorbed as their 32-byte canonical form,
// byte strings as an 8-byte big-endian length followed by the bytes.
// Byte-string items borrow their storage for the duration of the call.
class HashItem {
public:
    HashItem(const FieldElement& f) : v_(f) {}
    HashItem(ByteView b) : v_(b) {}
    HashItem(const Bytes& b) : v_(ByteView(b)) {}
    HashItem(std::string_view s) : v_(as_bytes(s)) {}
    HashItem(const char* s) : HashItem(std::string_view(s)) {}

    void absorb(ByteWriter& out) const;

private:
    std::variant<FieldElement, ByteView> v_;
};

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(ByteView data);
Digest hmac_sha256(ByteView key, ByteView data);

FieldElement hash_to_field(Domain domain, std::span<const HashItem> inputs);
inline FieldElement hash_to_field(Domain domain, std::initializer_list<HashItem> inputs) {
    return hash_to_field(domain, std::span<const HashItem>(inputs.begin(), inputs.size()));
}

}  // namespace rln
