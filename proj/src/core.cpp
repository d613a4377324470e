#include "rln/core.hpp"

#include "rln/errors.hpp"

namespace rln {

FieldElement identity_commitment(const FieldElement& sk) { return hash_to_field(Domain::Commitment, {sk}); }

FieldElement message_hash(ByteView m) { return hash_to_field(Domain::Msg, {m}); }

FieldElement share_coefficient(const FieldElement& sk, Epoch epoch) {
    return hash_to_field(Domain::Coeff, {sk, epoch.to_field()});
}

Share compute_share(const FieldElement& sk, Epoch epoch, ByteView m) {
    auto x = message_hash(m);
    auto a1 = share_coefficient(sk, epoch);
    return Share{x, sk + a1 * x};
}

FieldElement compute_internal_nullifier(const FieldElement& sk, Epoch epoch) {
    return hash_to_field(Domain::Nullifier, {share_coefficient(sk, epoch)});
}

FieldElement recover_secret(const Share& s1, const Share& s2) {
    if (s1.x == s2.x) throw Error(Errc::DuplicateShare, "shares have the same x coordinate");
    auto slope = (s2.y - s1.y) * (s2.x - s1.x).inverse();
    return s1.y - s1.x * slope;
}

}  // namespace rln
