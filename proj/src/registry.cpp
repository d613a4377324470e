#include "rln/registry.hpp"

#include <sstream>

#include "rln/core.hpp"
#include "rln/errors.hpp"
#include "rln/hash.hpp"

namespace rln {

void DepositPolicy::validate() const {
    if (s == 0) throw Error(Errc::ConfigValidation, "deposit.s must be > 0");
    if (v != f + s) throw Error(Errc::ConfigValidation, "deposit.v must equal deposit.f + deposit.s");
    if (reward_ppm == 0 || reward_ppm > kPpmOne) {
        throw Error(Errc::ConfigValidation, "deposit.reward_fraction must be in (0, 1]");
    }
}

FieldElement slash_commitment(const FieldElement& sk, const AccountId& slasher, ByteView salt) {
    return hash_to_field(Domain::SlashCommit, {sk, std::string_view(slasher), salt});
}

std::string_view to_string(TxKind kind) {
    switch (kind) {
        case TxKind::Register: return "register";
        case TxKind::Withdraw: return "withdraw";
        case TxKind::SlashCommit: return "slash_commit";
        case TxKind::SlashReveal: return "slash_reveal";
    }
    return "unknown";
}

Registry::Registry(RegistryConfig config) : config_(std::move(config)) { config_.policy.validate(); }

void Registry::record(TxKind kind, const std::string& actor, std::string outcome) {
    tx_log_.push_back(TxRecord{next_position(), kind, actor, std::move(outcome)});
}

void Registry::fail(TxKind kind, const std::string& actor, Errc code, const std::string& what) {
    record(kind, actor, std::string(to_string(code)));
    throw Error(code, what);
}

std::uint64_t Registry::register_member(const FieldElement& pk, Amount amount, const std::string& actor) {
    if (amount != policy().v) {
        fail(TxKind::Register, actor, Errc::WrongDeposit,
             "sent " + std::to_string(amount) + ", required " + std::to_string(policy().v));
    }
    if (active_.contains(pk)) fail(TxKind::Register, actor, Errc::AlreadyRegistered, "pk " + pk.to_hex());

    const std::uint64_t slot = members_.size();
    members_.push_back(pk);
    deposits_.push_back(policy().s);
    active_.emplace(pk, slot);
    fee_pool_ += policy().f;
    total_paid_in_ += amount;
    events_.push_back(RegistryEvent{events_.size() + 1, RegistryEvent::Kind::Insert, slot, pk});
    record(TxKind::Register, actor, "ok");
    return slot;
}

void Registry::remove_member(std::uint64_t slot) {
    active_.erase(*members_[slot]);
    members_[slot].reset();
    deposits_[slot] = 0;
    events_.push_back(RegistryEvent{events_.size() + 1, RegistryEvent::Kind::Delete, slot, kNilLeaf});
}

Amount Registry::withdraw(const FieldElement& sk, const std::string& actor) {
    auto pk = identity_commitment(sk);
    auto it = active_.find(pk);
    if (it == active_.end()) fail(TxKind::Withdraw, actor, Errc::NotAMember, "pk " + pk.to_hex());
    const auto slot = it->second;
    const Amount refund = deposits_[slot];
    remove_member(slot);
    withdrawn_.insert(pk);
    refunds_paid_ += refund;
    record(TxKind::Withdraw, actor, "ok");
    return refund;
}

std::uint64_t Registry::slash_commit(const FieldElement& commitment, const AccountId& slasher) {
    const auto position = next_position();
    commits_.push_back(SlashCommit{commitment, slasher, position, std::nullopt, false});
    record(TxKind::SlashCommit, slasher, "ok");
    return position;
}

Amount Registry::slash_reveal(const FieldElement& sk, const AccountId& slasher, ByteView salt) {
    const auto position = next_position();
    const auto expected = slash_commitment(sk, slasher, salt);
    auto expired = [&](const SlashCommit& c) { return position > c.position + config_.commit_window; };

    SlashCommit* own = nullptr;
    bool any_match = false;
    for (auto& c : commits_) {
        if (c.consumed || c.slasher != slasher || c.commitment != expected) continue;
        any_match = true;
        c.known_target = sk;
        if (!own && !expired(c)) own = &c;
    }
    if (!any_match) fail(TxKind::SlashReveal, slasher, Errc::NoMatchingCommit, "no commit opens to this reveal");
    if (!own) fail(TxKind::SlashReveal, slasher, Errc::CommitExpired, "every matching commit is expired");

    const auto pk = identity_commitment(sk);
    auto member = active_.find(pk);
    if (member == active_.end()) {
        if (withdrawn_.contains(pk)) ++escapes_;
        fail(TxKind::SlashReveal, slasher, Errc::NotAMember, "pk " + pk.to_hex());
    }

    // An earlier live commit by someone else wins if it may target this key.
    // Unrevealed commits are opaque, so they are assumed to match.
    for (const auto& c : commits_) {
        if (c.position >= own->position) break;
        if (c.consumed || c.slasher == slasher || expired(c)) continue;
        if (!c.known_target || *c.known_target == sk) {
            fail(TxKind::SlashReveal, slasher, Errc::RevealNotEarliest,
                 "earlier commit at position " + std::to_string(c.position) + " by " + c.slasher);
        }
    }

    own->consumed = true;
    const auto slot = member->second;
    const Amount stake = deposits_[slot];
    const Amount reward = stake * policy().reward_ppm / kPpmOne;
    remove_member(slot);
    slashed_.insert(pk);
    balances_[slasher] += reward;
    rewards_paid_ += reward;
    fee_pool_ += stake - reward;
    record(TxKind::SlashReveal, slasher, "ok");
    return reward;
}

std::vector<RegistryEvent> Registry::events_since(std::uint64_t sequence) const {
    if (sequence >= events_.size()) return {};
    return {events_.begin() + static_cast<std::ptrdiff_t>(sequence), events_.end()};
}

FieldElement Registry::oracle_root(std::uint32_t depth) const {
    MerkleTree tree(depth);
    for (const auto& e : events_) tree.apply_event(e);
    return tree.root();
}

std::optional<std::uint64_t> Registry::index_of(const FieldElement& pk) const {
    auto it = active_.find(pk);
    if (it == active_.end()) return std::nullopt;
    return it->second;
}

Amount Registry::active_deposits() const {
    Amount total = 0;
    for (auto d : deposits_) total += d;
    return total;
}

Amount Registry::balance(const AccountId& account) const {
    auto it = balances_.find(account);
    return it == balances_.end() ? 0 : it->second;
}

bool Registry::conservation_holds() const {
    return total_paid_in_ == active_deposits() + fee_pool_ + rewards_paid_ + refunds_paid_;
}

std::string Registry::dump() const {
    std::ostringstream out;
    out << "members:\n";
    for (std::size_t i = 0; i < members_.size(); ++i) {
        out << "  " << i << ' ' << (members_[i] ? members_[i]->to_hex() : std::string("NIL")) << '\n';
    }
    out << "deposits:\n";
    for (std::size_t i = 0; i < deposits_.size(); ++i) out << "  " << i << ' ' << deposits_[i] << '\n';
    out << "fee_pool: " << fee_pool_ << '\n';
    out << "total_paid_in: " << total_paid_in_ << '\n';
    out << "rewards_paid: " << rewards_paid_ << '\n';
    out << "refunds_paid: " << refunds_paid_ << '\n';
    out << "rewards:\n";
    for (const auto& [account, amount] : balances_) out << "  " << account << ' ' << amount << '\n';
    out << "events: " << events_.size() << '\n';
    out << "transactions: " << tx_log_.size() << '\n';
    return out.str();
}

}  // namespace rln
