#include <doctest.h>

#include <memory>

#include "rln/relay.hpp"
#include "test_util.hpp"

using namespace rln;
using std::chrono::seconds;

namespace {

constexpr std::int64_t kStart = 1644810000;  // an epoch boundary for T = 30

Micros at(double s) { return Micros{static_cast<std::int64_t>((kStart + s) * 1e6)}; }

struct Net {
    std::shared_ptr<const ProofBackend> backend = std::make_shared<MockBackend>(MockBackend::from_seed(1));
    Registry registry;
    std::vector<Peer> peers;
    std::vector<Identity> ids;

    explicit Net(std::size_t n, std::uint32_t depth = 10) {
        PeerConfig cfg;
        cfg.tree_depth = depth;
        for (std::size_t i = 0; i < n; ++i) {
            ids.push_back(keygen_from_seed(1000 + i));
            registry.register_member(ids.back().pk, 100);
            peers.emplace_back("peer-" + std::to_string(i), cfg, backend);
            peers.back().set_identity(ids.back());
        }
        for (auto& p : peers) p.sync_tree(registry);
    }
};

}  // namespace

TEST_CASE("publish and relay between two honest peers") {
    Net net(3);
    auto b = net.peers[0].publish("hello", at(15));
    CHECK(b.share.x == message_hash("hello"));
    CHECK(b.root == net.peers[1].root());
    CHECK(b.epoch == current_epoch(kStart + 15, 30));
    auto d = net.peers[1].on_receive(b, at(15.2));
    CHECK(d.kind == Decision::Relay);
    CHECK_FALSE(d.recovered_sk.has_value());
    // Only one relay per bundle id.
    CHECK(net.peers[1].on_receive(b, at(15.3)).kind == Decision::DropDuplicate);
    // The publisher drops its own echo.
    CHECK(net.peers[0].on_receive(b, at(15.4)).kind == Decision::DropDuplicate);
}

TEST_CASE("local rate limit and registration checks") {
    Net net(2);
    net.peers[0].publish("a", at(1));
    CHECK(error_code([&] { net.peers[0].publish("b", at(29)); }) == Errc::RateLimitLocal);
    CHECK_NOTHROW(net.peers[0].publish("c", at(31)));

    Peer outsider("outsider", PeerConfig{}, net.backend);
    CHECK(error_code([&] { outsider.publish("x", at(1)); }) == Errc::NotRegistered);
    outsider.set_identity(keygen_from_seed(5));
    outsider.sync_tree(net.registry);
    CHECK(error_code([&] { outsider.publish("x", at(1)); }) == Errc::NotRegistered);
}

TEST_CASE("epoch gap window") {
    Net net(2);
    auto& rx = net.peers[1];
    const auto now = at(45);  // local epoch e
    const auto e = rx.local_epoch(now).index;
    auto mk = [&](std::int64_t delta, const char* m) {
        return build_bundle(net.ids[0], net.peers[0].tree(), 0, as_bytes(std::string_view(m)),
                            Epoch{e + delta}, *net.backend);
    };
    CHECK(rx.on_receive(mk(0, "a"), now).kind == Decision::Relay);
    CHECK(rx.on_receive(mk(-1, "b"), now).kind == Decision::Relay);
    CHECK(rx.on_receive(mk(1, "c"), now).kind == Decision::Relay);
    CHECK(rx.on_receive(mk(-2, "d"), now).kind == Decision::DropStaleEpoch);
    CHECK(rx.on_receive(mk(2, "e"), now).kind == Decision::DropFutureEpoch);
    CHECK(rx.on_receive(mk(-40, "f"), now).kind == Decision::DropStaleEpoch);
}

TEST_CASE("second message in the same epoch exposes the key") {
    Net net(3);
    const auto epoch = net.peers[0].local_epoch(at(15));
    auto b1 = build_bundle(net.ids[0], net.peers[0].tree(), 0, as_bytes(std::string_view("one")), epoch, *net.backend);
    auto b2 = build_bundle(net.ids[0], net.peers[0].tree(), 0, as_bytes(std::string_view("two")), epoch, *net.backend);
    CHECK(b1.nullifier == b2.nullifier);
    auto& rx = net.peers[2];
    CHECK(rx.on_receive(b1, at(15)).kind == Decision::Relay);
    auto d = rx.on_receive(b2, at(15.1));
    REQUIRE(d.kind == Decision::SlashDetected);
    CHECK(*d.recovered_sk == net.ids[0].sk);
    CHECK(identity_commitment(*d.recovered_sk) == net.ids[0].pk);
}

TEST_CASE("identical share after seen-cache eviction is still a duplicate") {
    Net net(3);
    PeerConfig cfg;
    cfg.tree_depth = 10;
    cfg.seen_capacity = 1;
    Peer rx("small", cfg, net.backend);
    rx.sync_tree(net.registry);
    auto b = net.peers[0].publish("same", at(15));
    auto other = net.peers[1].publish("other", at(15));
    CHECK(rx.on_receive(b, at(15)).kind == Decision::Relay);
    CHECK(rx.on_receive(other, at(15)).kind == Decision::Relay);
    CHECK_FALSE(rx.seen().contains(b.id()));
    // The nullifier map holds the same share, so this is not a slash.
    CHECK(rx.on_receive(b, at(15.1)).kind == Decision::DropDuplicate);
}

TEST_CASE("invalid proofs and unknown roots are dropped") {
    Net net(2);
    auto b = net.peers[0].publish("hello", at(15));
    auto& rx = net.peers[1];

    auto forged = b;
    forged.payload = to_bytes("other");
    Forger forger(3);
    forged.share = compute_share(net.ids[0].sk, b.epoch, "other");
    forged.proof = forger.forge(forged.public_inputs());
    CHECK(rx.on_receive(forged, at(15)).kind == Decision::DropInvalidProof);

    auto swapped = b;
    swapped.payload = to_bytes("hellO");  // x no longer matches the payload
    CHECK(rx.on_receive(swapped, at(15)).kind == Decision::DropInvalidProof);

    auto rooted = b;
    rooted.root = rooted.root + FieldElement(1);
    CHECK(rx.on_receive(rooted, at(15)).kind == Decision::DropUnknownRoot);

    CHECK(rx.on_receive(b, at(15)).kind == Decision::Relay);
}

TEST_CASE("bundles are accepted against recent roots only") {
    Net net(2);
    auto b = net.peers[0].publish("old-root", at(15));
    auto& rx = net.peers[1];
    for (int i = 0; i < 9; ++i) {
        net.registry.register_member(keygen_from_seed(50 + i).pk, 100);
        rx.sync_tree(net.registry);
    }
    CHECK(rx.recent_roots().size() == 10);
    CHECK(rx.recent_roots().contains(b.root));
    net.registry.register_member(keygen_from_seed(99).pk, 100);
    rx.sync_tree(net.registry);
    CHECK_FALSE(rx.recent_roots().contains(b.root));
    CHECK(rx.on_receive(b, at(15)).kind == Decision::DropUnknownRoot);
}

TEST_CASE("nullifier map pruning") {
    Net net(2);
    auto& rx = net.peers[1];
    NullifierMap map;
    const Share s{FieldElement(1), FieldElement(2)};
    map.observe(Epoch{10}, FieldElement(5), s);
    map.observe(Epoch{11}, FieldElement(5), s);
    map.observe(Epoch{12}, FieldElement(5), s);
    CHECK(map.prune(Epoch{11}) == 1);
    CHECK_FALSE(map.contains(Epoch{10}, FieldElement(5)));
    CHECK(map.contains(Epoch{11}, FieldElement(5)));
    CHECK(map.observe(Epoch{12}, FieldElement(5), s).outcome == NullifierMap::Outcome::Duplicate);

    auto b = net.peers[0].publish("x", at(15));
    rx.on_receive(b, at(15));
    CHECK(rx.nullifier_map().size() == 1);
    CHECK(rx.prune_nullifier_map(at(45)) == 0);  // e+1: still within Thr
    CHECK(rx.prune_nullifier_map(at(75)) == 1);  // e+2: older than current - Thr
    CHECK(rx.nullifier_map().size() == 0);
}

TEST_CASE("seen cache evicts in FIFO order") {
    SeenCache cache(3);
    for (int i = 0; i < 3; ++i) CHECK(cache.insert(FieldElement(i)));
    CHECK_FALSE(cache.insert(FieldElement(1)));
    CHECK(cache.insert(FieldElement(3)));
    CHECK(cache.size() == 3);
    CHECK_FALSE(cache.contains(FieldElement(0)));
    CHECK(cache.contains(FieldElement(1)));
}

TEST_CASE("bundle serialization round trip") {
    Net net(2);
    Forger forger(1);
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        MessageBundle b;
        b.payload = random_bytes(rng, uniform_below(rng, 300));
        b.share = {random_field_element(rng), random_field_element(rng)};
        b.nullifier = random_field_element(rng);
        b.epoch = Epoch{rng()};
        b.root = random_field_element(rng);
        b.proof = forger.forge(b.public_inputs());
        auto bytes = b.serialize();
        auto back = MessageBundle::deserialize(bytes);
        CHECK(back == b);
        CHECK(back.id() == b.id());
        bytes.pop_back();
        CHECK(error_code([&] { MessageBundle::deserialize(bytes); }) == Errc::Decode);
    }
    auto b = net.peers[0].publish("tail", at(1));
    auto bytes = b.serialize();
    bytes.push_back(0);
    CHECK(error_code([&] { MessageBundle::deserialize(bytes); }) == Errc::Decode);
}

TEST_CASE("tree sync follows registry events and recovers from gaps") {
    Net net(3);
    auto& p = net.peers[2];
    CHECK(p.root() == net.registry.oracle_root(10));
    CHECK(p.member_index() == 2u);
    net.registry.withdraw(net.ids[2].sk);
    CHECK(p.sync_tree(net.registry) == 1);
    CHECK_FALSE(p.member_index().has_value());
    CHECK(error_code([&] { p.publish("after", at(1)); }) == Errc::NotRegistered);
    CHECK(p.sync_tree(net.registry) == 0);

    // A late joiner catches up on the whole history in one sync.
    for (int i = 0; i < 6; ++i) net.registry.register_member(keygen_from_seed(300 + i).pk, 100);
    Peer late("late", net.peers[0].config(), net.backend);
    CHECK(late.sync_tree(net.registry) == 10);
    CHECK(late.root() == net.registry.oracle_root(10));
    CHECK(p.sync_tree(net.registry) == 6);
    CHECK(p.root() == late.root());
}

TEST_CASE("every random bundle gets exactly one decision") {
    Net net(4);
    auto& rx = net.peers[3];
    Rng rng(99);
    Forger forger(5);
    std::array<std::size_t, kDecisionCount> counts{};
    int false_slashes = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto who = uniform_below(rng, 3);
        const auto now = at(15 + 30.0 * (i / 500));
        const auto base = rx.local_epoch(now).index;
        const Epoch epoch{base + uniform_below(rng, 5) - 2};
        const auto m = "m" + std::to_string(uniform_below(rng, 50));
        auto b = build_bundle(net.ids[who], net.peers[who].tree(), who, as_bytes(std::string_view(m)), epoch,
                              *net.backend);
        switch (uniform_below(rng, 6)) {
            case 0: b.proof = forger.forge(b.public_inputs()); break;
            case 1: b.root = random_field_element(rng); break;
            case 2: b.payload.push_back('!'); break;
            default: break;
        }
        auto d = rx.on_receive(b, now);
        ++counts[static_cast<std::size_t>(d.kind)];
        if (d.kind == Decision::SlashDetected && *d.recovered_sk != net.ids[who].sk) ++false_slashes;
        if (i % 100 == 0) rx.prune_nullifier_map(now);
    }
    std::size_t total = 0;
    for (auto c : counts) total += c;
    CHECK(total == 10000);
    CHECK(false_slashes == 0);
    CHECK(counts[static_cast<std::size_t>(Decision::SlashDetected)] > 0);
    CHECK(counts[static_cast<std::size_t>(Decision::DropInvalidProof)] > 0);
}

TEST_CASE("distinct members never collide into a slash") {
    // Many members in one epoch produce distinct nullifiers, so no pair of
    // honest single messages is mistaken for double signalling.
    Net net(40);
    auto& rx = net.peers[0];
    for (std::size_t i = 1; i < 40; ++i) {
        auto b = net.peers[i].publish("same text", at(15));
        CHECK(rx.on_receive(b, at(15.5)).kind == Decision::Relay);
    }
    CHECK(rx.nullifier_map().size() == 39);
}

TEST_CASE("decision names") {
    CHECK(to_string(Decision::Relay) == "relay");
    CHECK(to_string(Decision::DropStaleEpoch) == "drop_stale_epoch");
    CHECK(to_string(Decision::SlashDetected) == "slash_detected");
}
