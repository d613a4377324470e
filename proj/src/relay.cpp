#include "rln/relay.hpp"

#include "rln/errors.hpp"

namespace rln {

Bytes MessageBundle::serialize() const {
    ByteWriter w;
    w.put_prefixed(payload);
    w.put_raw(share.x.to_bytes());
    w.put_raw(share.y.to_bytes());
    w.put_raw(nullifier.to_bytes());
    w.put_u64(epoch.index);
    w.put_raw(root.to_bytes());
    w.put_u8(proof.backend);
    w.put_prefixed(proof.payload);
    return std::move(w).take();
}

namespace {
FieldElement read_field(ByteReader& r) {
    auto f = FieldElement::from_bytes(r.get_raw(kFieldBytes));
    if (!f) throw Error(Errc::Decode, "non-canonical field element");
    return *f;
}
}  // namespace

MessageBundle MessageBundle::deserialize(ByteView data) {
    ByteReader r(data);
    MessageBundle b;
    auto m = r.get_prefixed();
    b.payload.assign(m.begin(), m.end());
    b.share.x = read_field(r);
    b.share.y = read_field(r);
    b.nullifier = read_field(r);
    b.epoch.index = r.get_u64();
    b.root = read_field(r);
    b.proof.backend = r.get_u8();
    auto p = r.get_prefixed();
    b.proof.payload.assign(p.begin(), p.end());
    if (!r.done()) throw Error(Errc::Decode, "trailing bytes after bundle");
    return b;
}

FieldElement MessageBundle::id() const { return hash_to_field(Domain::Msg, {serialize()}); }

MessageBundle build_bundle(const Identity& identity, const MerkleTree& tree, std::uint64_t leaf_index, ByteView m,
                           Epoch epoch, const ProofBackend& backend) {
    MessageBundle b;
    b.payload.assign(m.begin(), m.end());
    b.share = compute_share(identity.sk, epoch, m);
    b.nullifier = compute_internal_nullifier(identity.sk, epoch);
    b.epoch = epoch;
    b.root = tree.root();
    PrivateInputs priv{identity.sk, leaf_index, tree.auth_path(leaf_index)};
    b.proof = backend.prove(priv, b.public_inputs());
    return b;
}

std::string_view to_string(Decision d) {
    switch (d) {
        case Decision::Relay: return "relay";
        case Decision::DropStaleEpoch: return "drop_stale_epoch";
        case Decision::DropFutureEpoch: return "drop_future_epoch";
        case Decision::DropUnknownRoot: return "drop_unknown_root";
        case Decision::DropInvalidProof: return "drop_invalid_proof";
        case Decision::DropDuplicate: return "drop_duplicate";
        case Decision::SlashDetected: return "slash_detected";
    }
    return "unknown";
}

NullifierMap::Result NullifierMap::observe(Epoch epoch, const FieldElement& nullifier, const Share& share) {
    auto [it, inserted] = entries_.try_emplace({epoch.index, nullifier}, share);
    if (inserted) return {Outcome::Inserted, share};
    return {it->second == share ? Outcome::Duplicate : Outcome::Conflict, it->second};
}

std::size_t NullifierMap::prune(Epoch oldest_kept) {
    auto end = entries_.lower_bound({oldest_kept.index, FieldElement{}});
    auto removed = static_cast<std::size_t>(std::distance(entries_.begin(), end));
    entries_.erase(entries_.begin(), end);
    return removed;
}

bool SeenCache::insert(const FieldElement& id) {
    if (!set_.insert(id).second) return false;
    order_.push_back(id);
    if (order_.size() > capacity_) {
        set_.erase(order_.front());
        order_.pop_front();
    }
    return true;
}

void RecentRoots::push(const FieldElement& root) {
    if (!roots_.empty() && roots_.back() == root) return;
    roots_.push_back(root);
    if (roots_.size() > capacity_) roots_.pop_front();
}

bool RecentRoots::contains(const FieldElement& root) const {
    return std::find(roots_.begin(), roots_.end(), root) != roots_.end();
}

Peer::Peer(AccountId account, PeerConfig config, std::shared_ptr<const ProofBackend> backend)
    : account_(std::move(account)),
      config_(config),
      backend_(std::move(backend)),
      tree_(config.tree_depth),
      roots_(config.root_window),
      seen_(config.seen_capacity) {
    roots_.push(tree_.root());
}

void Peer::set_identity(const Identity& identity) {
    identity_ = identity;
    member_index_.reset();
    for (const auto& [index, leaf] : tree_.leaves()) {
        if (leaf == identity.pk) member_index_ = index;
    }
}

Epoch Peer::local_epoch(Micros now) const {
    auto local = now + config_.clock_offset;
    if (local.count() < 0) local = Micros{0};
    return current_epoch(local, config_.epoch.length);
}

MessageBundle Peer::publish(ByteView m, Micros now) {
    if (!identity_ || !member_index_) throw Error(Errc::NotRegistered, account_ + " has no leaf in its local tree");
    const auto epoch = local_epoch(now);
    if (last_published_ && *last_published_ == epoch) {
        throw Error(Errc::RateLimitLocal, account_ + " already published in epoch " + std::to_string(epoch.index));
    }
    MessageBundle bundle;
    try {
        bundle = build_bundle(*identity_, tree_, *member_index_, m, epoch, *backend_);
    } catch (const ConstraintViolation& e) {
        throw Error(Errc::ProofFailure, e.what());
    }
    last_published_ = epoch;
    remember_own(bundle);
    return bundle;
}

void Peer::remember_own(const MessageBundle& bundle) {
    seen_.insert(bundle.id());
    nullifiers_.observe(bundle.epoch, bundle.nullifier, bundle.share);
}

RoutingDecision Peer::on_receive(const MessageBundle& bundle, Micros now) {
    if (!seen_.insert(bundle.id())) return {Decision::DropDuplicate, std::nullopt};

    const auto current = local_epoch(now).index;
    const auto epoch = bundle.epoch.index;
    if (epoch < current && current - epoch > config_.epoch.thr) return {Decision::DropStaleEpoch, std::nullopt};
    if (epoch > current && epoch - current > config_.epoch.thr) return {Decision::DropFutureEpoch, std::nullopt};

    if (!roots_.contains(bundle.root)) return {Decision::DropUnknownRoot, std::nullopt};

    // The proof binds x, so x must be the hash of the payload actually carried.
    if (bundle.share.x != message_hash(bundle.payload) || !backend_->verify(bundle.public_inputs(), bundle.proof)) {
        return {Decision::DropInvalidProof, std::nullopt};
    }

    auto seen = nullifiers_.observe(bundle.epoch, bundle.nullifier, bundle.share);
    switch (seen.outcome) {
        case NullifierMap::Outcome::Inserted:
            return {Decision::Relay, std::nullopt};
        case NullifierMap::Outcome::Duplicate:
            return {Decision::DropDuplicate, std::nullopt};
        case NullifierMap::Outcome::Conflict:
            // Same nullifier and message hash but a different y cannot come from one
            // line; treat it as a malformed duplicate rather than a recoverable pair.
            if (seen.first.x == bundle.share.x) return {Decision::DropDuplicate, std::nullopt};
            return {Decision::SlashDetected, recover_secret(seen.first, bundle.share)};
    }
    return {Decision::DropDuplicate, std::nullopt};
}

std::size_t Peer::prune_nullifier_map(Micros now) {
    const auto current = local_epoch(now).index;
    const auto oldest = current > config_.epoch.thr ? current - config_.epoch.thr : 0;
    return nullifiers_.prune(Epoch{oldest});
}

SlashRequest Peer::initiate_slash(const FieldElement& sk, ByteView salt) const {
    return SlashRequest{slash_commitment(sk, account_, salt), account_, sk, Bytes(salt.begin(), salt.end())};
}

std::size_t Peer::apply_events(const std::vector<RegistryEvent>& events) {
    for (const auto& e : events) {
        tree_.apply_event(e);
        if (!identity_) continue;
        if (e.kind == RegistryEvent::Kind::Insert && e.pk == identity_->pk) member_index_ = e.index;
        if (e.kind == RegistryEvent::Kind::Delete && member_index_ == e.index) member_index_.reset();
    }
    return events.size();
}

std::size_t Peer::sync_tree(const Registry& registry) {
    std::size_t applied = 0;
    try {
        applied = apply_events(registry.events_since(tree_.last_sequence()));
    } catch (const Error& e) {
        if (e.code() != Errc::SequenceGap) throw;
        tree_ = MerkleTree(config_.tree_depth);
        member_index_.reset();
        applied = apply_events(registry.events_since(0));
    }
    roots_.push(tree_.root());
    return applied;
}

}  // namespace rln
