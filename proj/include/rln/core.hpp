#pragma once

#include <string_view>

#include "rln/epoch.hpp"
#include "rln/field.hpp"
#include "rln/hash.hpp"
#include "rln/random.hpp"

namespace rln {

struct Identity {
    FieldElement sk;  // identity secret key
    FieldElement pk;  // identity commitment, H(sk)

    friend bool operator==(const Identity&, const Identity&) = default;
};

// A point (x, y) on the member's per-epoch line y = sk + a1 * x.
struct Share {
    FieldElement x;
    FieldElement y;

    friend bool operator==(const Share&, const Share&) = default;
};

FieldElement identity_commitment(const FieldElement& sk);

// Uniform in [0, p) by rejection over 254-bit candidates.
template <std::uniform_random_bit_generator G>
FieldElement random_field_element(G& rng) {
    for (;;) {
        auto bytes = random_bytes(rng, kFieldBytes);
        bytes[0] &= 0x3f;
        if (auto f = FieldElement::from_bytes(bytes)) return *f;
    }
}

template <std::uniform_random_bit_generator G>
Identity keygen(G& rng) {
    auto sk = random_field_element(rng);
    return Identity{sk, identity_commitment(sk)};
}

inline Identity keygen_from_seed(std::uint64_t seed) {
    Rng rng(seed);
    return keygen(rng);
}

FieldElement message_hash(ByteView m);
inline FieldElement message_hash(std::string_view m) { return message_hash(as_bytes(m)); }

// a1 = H(sk, epoch): the slope of the member's line for this epoch.
FieldElement share_coefficient(const FieldElement& sk, Epoch epoch);

Share compute_share(const FieldElement& sk, Epoch epoch, ByteView m);
inline Share compute_share(const FieldElement& sk, Epoch epoch, std::string_view m) {
    return compute_share(sk, epoch, as_bytes(m));
}

// phi = H(H(sk, epoch)).
FieldElement compute_internal_nullifier(const FieldElement& sk, Epoch epoch);

// Intercept at x = 0 of the line through both shares.
// Throws Error(Errc::DuplicateShare) when s1.x == s2.x.
FieldElement recover_secret(const Share& s1, const Share& s2);

}  // namespace rln
