#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "rln/bytes.hpp"
#include "rln/epoch.hpp"
#include "rln/errors.hpp"
#include "rln/field.hpp"
#include "rln/merkle.hpp"
#include "rln/random.hpp"

namespace rln {

// Public statement of the rate-limit circuit. The share's x coordinate is the
// message hash, so it is carried once.
struct PublicInputs {
    FieldElement x;
    Epoch epoch;
    FieldElement nullifier;
    FieldElement y;
    FieldElement root;

    // x || epoch(8B) || nullifier || y || root
    Bytes serialize() const;
    friend bool operator==(const PublicInputs&, const PublicInputs&) = default;
};

// Witness. Deliberately has no serialization.
struct PrivateInputs {
    FieldElement sk;
    std::uint64_t leaf_index = 0;
    AuthPath auth;
};

struct Proof {
    std::uint8_t backend = 0;
    Bytes payload;

    friend bool operator==(const Proof&, const Proof&) = default;
};

enum class Constraint : std::uint8_t { Membership, Share, Nullifier };
std::string_view to_string(Constraint c);

class ConstraintViolation : public Error {
public:
    explicit ConstraintViolation(Constraint c)
        : Error(Errc::ConstraintViolated, std::string(to_string(c))), constraint_(c) {}
    Constraint constraint() const noexcept { return constraint_; }

private:
    Constraint constraint_;
};

// First violated circuit constraint, checked in order membership, share, nullifier.
std::optional<Constraint> check_constraints(const PrivateInputs& priv, const PublicInputs& pub);

class ProofBackend {
public:
    virtual ~ProofBackend() = default;
    // Throws ConstraintViolation when the witness does not satisfy the circuit.
    virtual Proof prove(const PrivateInputs& priv, const PublicInputs& pub) const = 0;
    virtual bool verify(const PublicInputs& pub, const Proof& proof) const = 0;
};

// Stand-in for a SNARK: the prover checks the circuit itself and then emits
// HMAC-SHA256(key, pub.serialize()). Neither zero-knowledge nor sound against
// anyone holding the key; every prover in a simulation shares it.
class MockBackend final : public ProofBackend {
public:
    static constexpr std::uint8_t kTag = 0x01;
    using Key = std::array<std::uint8_t, 32>;

    explicit MockBackend(const Key& key) : key_(key) {}
    static MockBackend from_seed(std::uint64_t seed);

    Proof prove(const PrivateInputs& priv, const PublicInputs& pub) const override;
    bool verify(const PublicInputs& pub, const Proof& proof) const override;

private:
    Key key_;
};

// Adversarial prover: random payloads under the honest backend tag.
class Forger {
public:
    explicit Forger(std::uint64_t seed) : rng_(seed) {}
    Proof forge(const PublicInputs& pub);

private:
    Rng rng_;
};

}  // namespace rln
