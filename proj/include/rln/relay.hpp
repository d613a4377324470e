#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <string_view>
#include <unordered_set>

#include "rln/core.hpp"
#include "rln/merkle.hpp"
#include "rln/proof.hpp"
#include "rln/registry.hpp"

namespace rln {

using Micros = std::chrono::microseconds;

// Wire unit: (m, (x, y), phi, epoch, root, proof).
struct MessageBundle {
    Bytes payload;
    Share share;
    FieldElement nullifier;
    Epoch epoch;
    FieldElement root;
    Proof proof;

    // prefixed m || x || y || phi || epoch(8B) || root || proof tag || prefixed proof payload
    Bytes serialize() const;
    static MessageBundle deserialize(ByteView data);
    // hash_to_field(Msg, [serialize()])
    FieldElement id() const;
    PublicInputs public_inputs() const { return PublicInputs{share.x, epoch, nullifier, share.y, root}; }

    friend bool operator==(const MessageBundle&, const MessageBundle&) = default;
};

// Proves and assembles a bundle for `identity` at `leaf_index`. Skips every
// rate-limit check; Peer::publish is the honest entry point.
MessageBundle build_bundle(const Identity& identity, const MerkleTree& tree, std::uint64_t leaf_index, ByteView m,
                           Epoch epoch, const ProofBackend& backend);

enum class Decision : std::uint8_t {
    Relay,
    DropStaleEpoch,
    DropFutureEpoch,
    DropUnknownRoot,
    DropInvalidProof,
    DropDuplicate,
    SlashDetected,
};
inline constexpr std::size_t kDecisionCount = 7;
std::string_view to_string(Decision d);

struct RoutingDecision {
    Decision kind = Decision::Relay;
    std::optional<FieldElement> recovered_sk;  // set for SlashDetected
};

// (epoch, phi) -> first share seen.
class NullifierMap {
public:
    enum class Outcome : std::uint8_t { Inserted, Duplicate, Conflict };
    struct Result {
        Outcome outcome;
        Share first;
    };

    Result observe(Epoch epoch, const FieldElement& nullifier, const Share& share);
    // Drops entries with epoch < oldest_kept; returns how many.
    std::size_t prune(Epoch oldest_kept);
    std::size_t size() const { return entries_.size(); }
    bool contains(Epoch epoch, const FieldElement& nullifier) const {
        return entries_.contains({epoch.index, nullifier});
    }

private:
    std::map<std::pair<std::uint64_t, FieldElement>, Share> entries_;
};

// Bounded FIFO set of bundle ids.
class SeenCache {
public:
    explicit SeenCache(std::size_t capacity = 4096) : capacity_(capacity) {}

    // False when the id was already present.
    bool insert(const FieldElement& id);
    bool contains(const FieldElement& id) const { return set_.contains(id); }
    std::size_t size() const { return order_.size(); }

private:
    std::size_t capacity_;
    std::deque<FieldElement> order_;
    std::unordered_set<FieldElement> set_;
};

// Last K tree roots a peer accepts bundles against.
class RecentRoots {
public:
    explicit RecentRoots(std::size_t capacity = 10) : capacity_(capacity) {}

    void push(const FieldElement& root);
    bool contains(const FieldElement& root) const;
    const FieldElement& latest() const { return roots_.back(); }
    bool empty() const { return roots_.empty(); }
    std::size_t size() const { return roots_.size(); }

private:
    std::size_t capacity_;
    std::deque<FieldElement> roots_;
};

struct PeerConfig {
    EpochConfig epoch;
    Micros clock_offset{0};
    std::size_t seen_capacity = 4096;
    std::size_t root_window = 10;
    std::uint32_t tree_depth = MerkleTree::kDefaultDepth;
};

// A commit transaction plus the material for its later reveal.
struct SlashRequest {
    FieldElement commitment;
    AccountId slasher;
    FieldElement sk;
    Bytes salt;
};

class Peer {
public:
    Peer(AccountId account, PeerConfig config, std::shared_ptr<const ProofBackend> backend);

    const AccountId& account() const { return account_; }
    const PeerConfig& config() const { return config_; }

    void set_identity(const Identity& identity);
    const std::optional<Identity>& identity() const { return identity_; }
    std::optional<std::uint64_t> member_index() const { return member_index_; }

    Epoch local_epoch(Micros now) const;

    // Throws NotRegistered, RateLimitLocal, ProofFailure.
    MessageBundle publish(ByteView m, Micros now);
    MessageBundle publish(std::string_view m, Micros now) { return publish(as_bytes(m), now); }

    // Checks run cheapest first: seen cache, epoch gap, root, proof, nullifier map.
    RoutingDecision on_receive(const MessageBundle& bundle, Micros now);

    std::size_t prune_nullifier_map(Micros now);

    SlashRequest initiate_slash(const FieldElement& sk, ByteView salt) const;

    // Pulls new registry events; on a sequence gap rebuilds from scratch.
    // Returns the number of events applied.
    std::size_t sync_tree(const Registry& registry);

    // Marks a locally originated bundle so echoes are dropped.
    void remember_own(const MessageBundle& bundle);

    const MerkleTree& tree() const { return tree_; }
    const FieldElement& root() const { return tree_.root(); }
    const RecentRoots& recent_roots() const { return roots_; }
    const NullifierMap& nullifier_map() const { return nullifiers_; }
    const SeenCache& seen() const { return seen_; }
    std::optional<Epoch> last_published() const { return last_published_; }
    const ProofBackend& backend() const { return *backend_; }

private:
    std::size_t apply_events(const std::vector<RegistryEvent>& events);

    AccountId account_;
    PeerConfig config_;
    std::shared_ptr<const ProofBackend> backend_;
    std::optional<Identity> identity_;
    std::optional<std::uint64_t> member_index_;
    MerkleTree tree_;
    RecentRoots roots_;
    NullifierMap nullifiers_;
    SeenCache seen_;
    std::optional<Epoch> last_published_;
};

}  // namespace rln
