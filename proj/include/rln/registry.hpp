#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rln/bytes.hpp"
#include "rln/errors.hpp"
#include "rln/field.hpp"
#include "rln/merkle.hpp"

namespace rln {

using Amount = std::uint64_t;
using AccountId = std::string;

inline constexpr std::uint32_t kPpmOne = 1'000'000;

// v = f + s: f is burned at registration, s is the slashable stake.
struct DepositPolicy {
    Amount v = 100;
    Amount f = 10;
    Amount s = 90;
    std::uint32_t reward_ppm = kPpmOne;  // share of s paid to the slasher, in millionths

    Amount reward() const { return s * reward_ppm / kPpmOne; }
    // Throws Error(Errc::ConfigValidation) naming the offending field.
    void validate() const;
};

struct RegistryConfig {
    DepositPolicy policy;
    // A commit at log position c is usable by reveals at positions <= c + commit_window.
    std::uint64_t commit_window = 100;
};

// hash_to_field(SlashCommit, [sk, slasher bytes, salt]).
FieldElement slash_commitment(const FieldElement& sk, const AccountId& slasher, ByteView salt);

struct SlashCommit {
    FieldElement commitment;
    AccountId slasher;
    std::uint64_t position = 0;
    std::optional<FieldElement> known_target;  // learned when its owner reveals
    bool consumed = false;
};

enum class TxKind : std::uint8_t { Register, Withdraw, SlashCommit, SlashReveal };

struct TxRecord {
    std::uint64_t position = 0;
    TxKind kind = TxKind::Register;
    std::string actor;
    std::string outcome;  // "ok" or an error name
};

std::string_view to_string(TxKind kind);

// Mock membership contract. Every call is one transaction at the next log
// position, whether it succeeds or throws.
class Registry {
public:
    explicit Registry(RegistryConfig config = {});

    const RegistryConfig& config() const { return config_; }
    const DepositPolicy& policy() const { return config_.policy; }

    // Appends pk at the next fresh slot. Throws WrongDeposit / AlreadyRegistered.
    std::uint64_t register_member(const FieldElement& pk, Amount amount, const std::string& actor = "");
    // Returns the refunded stake. Throws NotAMember.
    Amount withdraw(const FieldElement& sk, const std::string& actor = "");
    // Returns the log position of the stored commit.
    std::uint64_t slash_commit(const FieldElement& commitment, const AccountId& slasher);
    // Returns the reward credited to slasher. Throws NoMatchingCommit, CommitExpired,
    // NotAMember, RevealNotEarliest.
    Amount slash_reveal(const FieldElement& sk, const AccountId& slasher, ByteView salt);

    std::vector<RegistryEvent> events_since(std::uint64_t sequence) const;
    std::uint64_t last_sequence() const { return events_.size(); }
    FieldElement oracle_root(std::uint32_t depth) const;

    const std::vector<std::optional<FieldElement>>& members() const { return members_; }
    std::optional<std::uint64_t> index_of(const FieldElement& pk) const;
    bool is_member(const FieldElement& pk) const { return index_of(pk).has_value(); }
    std::uint64_t active_members() const { return active_.size(); }
    Amount deposit(std::uint64_t slot) const { return deposits_.at(slot); }
    Amount active_deposits() const;
    Amount fee_pool() const { return fee_pool_; }
    Amount total_paid_in() const { return total_paid_in_; }
    Amount rewards_paid() const { return rewards_paid_; }
    Amount refunds_paid() const { return refunds_paid_; }
    Amount balance(const AccountId& account) const;
    const std::map<AccountId, Amount>& balances() const { return balances_; }
    std::uint64_t tx_count() const { return tx_log_.size(); }
    const std::vector<TxRecord>& tx_log() const { return tx_log_; }
    const std::vector<SlashCommit>& slash_commits() const { return commits_; }
    std::uint64_t slashes() const { return slashed_.size(); }
    // Reveals that failed because the target had already withdrawn its stake.
    std::uint64_t escapes() const { return escapes_; }
    bool was_withdrawn(const FieldElement& pk) const { return withdrawn_.contains(pk); }
    bool was_slashed(const FieldElement& pk) const { return slashed_.contains(pk); }

    // paid in == active deposits + fee pool + rewards + refunds
    bool conservation_holds() const;

    // Line-oriented dump, stable field order.
    std::string dump() const;

private:
    std::uint64_t next_position() const { return tx_log_.size() + 1; }
    void record(TxKind kind, const std::string& actor, std::string outcome);
    [[noreturn]] void fail(TxKind kind, const std::string& actor, Errc code, const std::string& what);
    void remove_member(std::uint64_t slot);

    RegistryConfig config_;
    std::vector<std::optional<FieldElement>> members_;
    std::vector<Amount> deposits_;
    std::map<FieldElement, std::uint64_t> active_;
    std::set<FieldElement> withdrawn_;
    std::set<FieldElement> slashed_;
    std::vector<RegistryEvent> events_;
    std::vector<SlashCommit> commits_;
    std::vector<TxRecord> tx_log_;
    std::map<AccountId, Amount> balances_;
    Amount fee_pool_ = 0;
    Amount total_paid_in_ = 0;
    Amount rewards_paid_ = 0;
    Amount refunds_paid_ = 0;
    std::uint64_t escapes_ = 0;
};

}  // namespace rln
