#include <doctest.h>

#include <algorithm>

#include "rln/core.hpp"
#include "rln/registry.hpp"
#include "test_util.hpp"

using namespace rln;

namespace {
const Bytes kSalt = to_bytes("salt");

Identity member(std::uint64_t seed) { return keygen_from_seed(seed); }
}  // namespace

TEST_CASE("deposit policy validation") {
    DepositPolicy p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.reward() == 90);
    p.v = 99;
    CHECK(error_code([&] { p.validate(); }) == Errc::ConfigValidation);
    DepositPolicy half;
    half.reward_ppm = kPpmOne / 2;
    CHECK(half.reward() == 45);
}

TEST_CASE("register appends in order and checks deposit and duplicates") {
    Registry reg;
    auto a = member(1), b = member(2), c = member(3);
    CHECK(reg.register_member(a.pk, 100) == 0);
    CHECK(reg.register_member(b.pk, 100) == 1);
    CHECK(reg.register_member(c.pk, 100) == 2);
    CHECK(error_code([&] { reg.register_member(member(4).pk, 99); }) == Errc::WrongDeposit);
    CHECK(error_code([&] { reg.register_member(a.pk, 100); }) == Errc::AlreadyRegistered);
    CHECK(reg.fee_pool() == 30);
    CHECK(reg.deposit(1) == 90);
    CHECK(reg.conservation_holds());
    // Failed calls still occupy log positions.
    CHECK(reg.tx_count() == 5);
    CHECK(reg.tx_log()[3].outcome == "WrongDeposit");
}

TEST_CASE("withdraw refunds the stake and keeps the fee") {
    Registry reg;
    auto a = member(1), b = member(2);
    reg.register_member(a.pk, 100);
    reg.register_member(b.pk, 100);
    CHECK(reg.withdraw(a.sk) == reg.policy().v - reg.policy().f);
    CHECK(error_code([&] { reg.withdraw(a.sk); }) == Errc::NotAMember);
    CHECK_FALSE(reg.members()[0].has_value());
    CHECK(reg.fee_pool() == 20);
    CHECK(reg.conservation_holds());
    // Freed slots are not reused.
    CHECK(reg.register_member(member(3).pk, 100) == 2);
    // Re-registering a withdrawn key appends a new slot.
    CHECK(reg.register_member(a.pk, 100) == 3);
}

TEST_CASE("events_since") {
    Registry reg;
    auto a = member(1), b = member(2);
    reg.register_member(a.pk, 100);
    reg.register_member(b.pk, 100);
    CHECK(reg.events_since(0).size() == 2);
    reg.withdraw(a.sk);
    auto ev = reg.events_since(0);
    REQUIRE(ev.size() == 3);
    CHECK(ev[0].kind == RegistryEvent::Kind::Insert);
    CHECK(ev[2].kind == RegistryEvent::Kind::Delete);
    CHECK(ev[2].index == 0);
    CHECK(ev[2].sequence == 3);
    CHECK(reg.events_since(2).size() == 1);
    CHECK(reg.events_since(3).empty());
    CHECK(reg.events_since(10).empty());
}

TEST_CASE("slash commitment reference value") {
    CHECK(slash_commitment(FieldElement(12345), "peer-1", kSalt) ==
          fe("1d62b38729a760dad959710b32e4e5dfe867ed6f9bdbad06152ba38e65c16a96"));
}

TEST_CASE("single committer reveals and is paid") {
    Registry reg;
    auto spammer = member(7);
    reg.register_member(spammer.pk, 100);
    reg.slash_commit(slash_commitment(spammer.sk, "alice", kSalt), "alice");
    CHECK(reg.slash_reveal(spammer.sk, "alice", kSalt) == 90);
    CHECK(reg.balance("alice") == 90);
    CHECK_FALSE(reg.is_member(spammer.pk));
    auto ev = reg.events_since(0);
    REQUIRE(ev.size() == 2);
    CHECK(ev[1].kind == RegistryEvent::Kind::Delete);
    CHECK(reg.conservation_holds());
    // Second reveal for the same member.
    reg.slash_commit(slash_commitment(spammer.sk, "bob", kSalt), "bob");
    CHECK(error_code([&] { reg.slash_reveal(spammer.sk, "bob", kSalt); }) == Errc::NotAMember);
    CHECK(reg.slashes() == 1);
}

TEST_CASE("partial reward burns the remainder") {
    RegistryConfig cfg;
    cfg.policy.reward_ppm = 600'000;
    Registry reg(cfg);
    auto spammer = member(7);
    reg.register_member(spammer.pk, 100);
    reg.slash_commit(slash_commitment(spammer.sk, "alice", kSalt), "alice");
    CHECK(reg.slash_reveal(spammer.sk, "alice", kSalt) == 54);
    CHECK(reg.fee_pool() == 10 + 36);
    CHECK(reg.conservation_holds());
}

TEST_CASE("reveal error paths") {
    Registry reg;
    auto spammer = member(7);
    reg.register_member(spammer.pk, 100);

    SUBCASE("wrong salt") {
        reg.slash_commit(slash_commitment(spammer.sk, "alice", kSalt), "alice");
        CHECK(error_code([&] { reg.slash_reveal(spammer.sk, "alice", to_bytes("other")); }) ==
              Errc::NoMatchingCommit);
    }
    SUBCASE("someone else's commitment cannot be opened") {
        reg.slash_commit(slash_commitment(spammer.sk, "alice", kSalt), "alice");
        CHECK(error_code([&] { reg.slash_reveal(spammer.sk, "mallory", kSalt); }) == Errc::NoMatchingCommit);
    }
    SUBCASE("arbitrary commitments are accepted") {
        Rng rng(1);
        CHECK(reg.slash_commit(random_field_element(rng), "mallory") == 2);
        CHECK(reg.slash_commit(random_field_element(rng), "mallory") == 3);
    }
    SUBCASE("copier committing after the honest commit loses") {
        reg.slash_commit(slash_commitment(spammer.sk, "alice", kSalt), "alice");
        // mallory saw the plain key and front-runs alice's reveal
        reg.slash_commit(slash_commitment(spammer.sk, "mallory", kSalt), "mallory");
        CHECK(error_code([&] { reg.slash_reveal(spammer.sk, "mallory", kSalt); }) == Errc::RevealNotEarliest);
        CHECK(reg.slash_reveal(spammer.sk, "alice", kSalt) == 90);
        CHECK(reg.balance("mallory") == 0);
    }
    SUBCASE("two committers are both stored, earliest wins") {
        reg.slash_commit(slash_commitment(spammer.sk, "alice", kSalt), "alice");
        reg.slash_commit(slash_commitment(spammer.sk, "bob", kSalt), "bob");
        reg.slash_commit(slash_commitment(spammer.sk, "bob", kSalt), "bob");
        CHECK(reg.slash_commits().size() == 3);
        CHECK(reg.slash_commits()[0].position < reg.slash_commits()[1].position);
        CHECK(error_code([&] { reg.slash_reveal(spammer.sk, "bob", kSalt); }) == Errc::RevealNotEarliest);
        CHECK(reg.slash_reveal(spammer.sk, "alice", kSalt) == 90);
    }
    SUBCASE("withdraw before reveal escapes") {
        reg.slash_commit(slash_commitment(spammer.sk, "alice", kSalt), "alice");
        CHECK(reg.withdraw(spammer.sk) == 90);
        CHECK(error_code([&] { reg.slash_reveal(spammer.sk, "alice", kSalt); }) == Errc::NotAMember);
        CHECK(reg.escapes() == 1);
        CHECK(reg.fee_pool() == 10);
        CHECK(reg.rewards_paid() == 0);
        CHECK(reg.conservation_holds());
    }
}

TEST_CASE("unrevealed commits expire") {
    RegistryConfig cfg;
    cfg.commit_window = 3;
    Registry reg(cfg);
    auto spammer = member(7);
    reg.register_member(spammer.pk, 100);                                      // 1
    reg.slash_commit(slash_commitment(spammer.sk, "alice", kSalt), "alice");  // 2, never revealed
    reg.slash_commit(slash_commitment(spammer.sk, "bob", kSalt), "bob");      // 3
    CHECK(error_code([&] { reg.slash_reveal(spammer.sk, "bob", kSalt); }) == Errc::RevealNotEarliest);  // 4
    CHECK(error_code([&] { reg.slash_reveal(spammer.sk, "bob", kSalt); }) == Errc::RevealNotEarliest);  // 5
    CHECK(reg.slash_reveal(spammer.sk, "bob", kSalt) == 90);  // 6: alice's commit expired at 6 > 2 + 3
    CHECK(reg.balance("alice") == 0);

    auto other = member(8);
    reg.register_member(other.pk, 100);                                  // 7
    reg.slash_commit(slash_commitment(other.sk, "bob", kSalt), "bob");  // 8
    for (int i = 0; i < 3; ++i) reg.slash_commit(FieldElement(i), "noise");
    CHECK(error_code([&] { reg.slash_reveal(other.sk, "bob", kSalt); }) == Errc::CommitExpired);  // 12 > 8 + 3
}

TEST_CASE("revealed commits stop blocking other targets") {
    Registry reg;
    auto s1 = member(7), s2 = member(8);
    reg.register_member(s1.pk, 100);
    reg.register_member(s2.pk, 100);
    reg.slash_commit(slash_commitment(s1.sk, "alice", kSalt), "alice");
    reg.slash_commit(slash_commitment(s2.sk, "bob", kSalt), "bob");
    // alice's commit is opaque, so bob must wait for it
    CHECK(error_code([&] { reg.slash_reveal(s2.sk, "bob", kSalt); }) == Errc::RevealNotEarliest);
    CHECK(reg.slash_reveal(s1.sk, "alice", kSalt) == 90);
    CHECK(reg.slash_reveal(s2.sk, "bob", kSalt) == 90);
}

TEST_CASE("race safety over random interleavings") {
    // Each of n slashers knows sk, commits once and reveals several times. The
    // earliest committer must receive the only reward, provided it reveals.
    Rng rng(2024);
    for (int round = 0; round < 300; ++round) {
        Registry reg;
        auto spammer = member(100 + round);
        reg.register_member(spammer.pk, 100);
        const std::size_t n = 2 + round % 3;
        struct Op {
            std::size_t who;
            bool commit;
        };
        std::vector<Op> ops;
        for (std::size_t s = 0; s < n; ++s) {
            ops.push_back({s, true});
            for (int k = 0; k < 3; ++k) ops.push_back({s, false});
        }
        shuffle(ops, rng);

        std::optional<std::size_t> earliest;
        bool earliest_revealed_after_commit = false;
        std::vector<bool> committed(n, false);
        std::size_t rewards = 0;
        std::optional<std::size_t> winner;
        for (const auto& op : ops) {
            const auto account = "s" + std::to_string(op.who);
            if (op.commit) {
                reg.slash_commit(slash_commitment(spammer.sk, account, kSalt), account);
                committed[op.who] = true;
                if (!earliest) earliest = op.who;
                continue;
            }
            if (earliest == op.who && committed[op.who]) earliest_revealed_after_commit = true;
            try {
                reg.slash_reveal(spammer.sk, account, kSalt);
                ++rewards;
                winner = op.who;
            } catch (const Error&) {
            }
        }
        CHECK(rewards == (earliest_revealed_after_commit ? 1u : 0u));
        if (winner) CHECK(*winner == *earliest);
        CHECK(reg.conservation_holds());
    }
}

TEST_CASE("dump lists members with NIL markers") {
    Registry reg;
    auto a = member(1), b = member(2);
    reg.register_member(a.pk, 100);
    reg.register_member(b.pk, 100);
    reg.withdraw(a.sk);
    auto text = reg.dump();
    CHECK(text.find("  0 NIL\n") != std::string::npos);
    CHECK(text.find("  1 " + b.pk.to_hex()) != std::string::npos);
    CHECK(text.find("fee_pool: 20\n") != std::string::npos);
    CHECK(text.find("members:") < text.find("deposits:"));
}

TEST_CASE("oracle root tracks the event log") {
    Registry reg;
    CHECK(reg.oracle_root(20) == empty_root(20));
    auto a = member(1);
    reg.register_member(a.pk, 100);
    MerkleTree t(20);
    t.set_leaf(0, a.pk);
    CHECK(reg.oracle_root(20) == t.root());
}
