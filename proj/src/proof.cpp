#include "rln/proof.hpp"

#include "rln/core.hpp"
#include "rln/hash.hpp"

namespace rln {

Bytes PublicInputs::serialize() const {
    ByteWriter w;
    w.put_raw(x.to_bytes());
    w.put_u64(epoch.index);
    w.put_raw(nullifier.to_bytes());
    w.put_raw(y.to_bytes());
    w.put_raw(root.to_bytes());
    return std::move(w).take();
}

std::string_view to_string(Constraint c) {
    switch (c) {
        case Constraint::Membership: return "membership";
        case Constraint::Share: return "share";
        case Constraint::Nullifier: return "nullifier";
    }
    return "unknown";
}

std::optional<Constraint> check_constraints(const PrivateInputs& priv, const PublicInputs& pub) {
    if (priv.auth.index != priv.leaf_index || !verify_path(pub.root, identity_commitment(priv.sk), priv.auth)) {
        return Constraint::Membership;
    }
    const auto a1 = share_coefficient(priv.sk, pub.epoch);
    if (pub.y != priv.sk + a1 * pub.x) return Constraint::Share;
    if (pub.nullifier != hash_to_field(Domain::Nullifier, {a1})) return Constraint::Nullifier;
    return std::nullopt;
}

MockBackend MockBackend::from_seed(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x70726f6f66ULL));
    auto bytes = random_bytes(rng, 32);
    Key key{};
    std::copy(bytes.begin(), bytes.end(), key.begin());
    return MockBackend(key);
}

Proof MockBackend::prove(const PrivateInputs& priv, const PublicInputs& pub) const {
    if (auto violated = check_constraints(priv, pub)) throw ConstraintViolation(*violated);
    auto tag = hmac_sha256(key_, pub.serialize());
    return Proof{kTag, Bytes(tag.begin(), tag.end())};
}

bool MockBackend::verify(const PublicInputs& pub, const Proof& proof) const {
    if (proof.backend != kTag || proof.payload.size() != 32) return false;
    auto tag = hmac_sha256(key_, pub.serialize());
    return std::equal(tag.begin(), tag.end(), proof.payload.begin());
}

Proof Forger::forge(const PublicInputs&) { return Proof{MockBackend::kTag, random_bytes(rng_, 32)}; }

}  // namespace rln
