#include <doctest.h>

#include <algorithm>

#include "rln/sim/scenarios.hpp"
#include "rln/sim/simulation.hpp"
#include "test_util.hpp"

using namespace rln;
using namespace rln::sim;

namespace {

SimConfig small(std::size_t peers, Topology::Kind kind) {
    SimConfig c;
    c.peers = peers;
    c.topology.kind = kind;
    return c;
}

Errc config_error(std::string_view text, std::string* message = nullptr) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        if (message) *message = e.what();
        return e.code();
    }
    FAIL("config accepted");
    return Errc::Io;
}

}  // namespace

TEST_CASE("topology link counts") {
    CHECK(Simulation(small(5, Topology::Kind::Complete)).link_count() == 10);
    CHECK(Simulation(small(5, Topology::Kind::Ring)).link_count() == 5);
    CHECK(Simulation(small(2, Topology::Kind::Ring)).link_count() == 1);
    auto c = small(20, Topology::Kind::Random);
    c.topology.avg_degree = 4;
    Simulation s(c);
    CHECK(s.link_count() == 40);
    for (const auto& nb : s.neighbors()) CHECK_FALSE(nb.empty());

    auto e = small(4, Topology::Kind::Explicit);
    e.topology.edges = {{0, 1}, {1, 2}, {2, 3}};
    CHECK(Simulation(e).link_count() == 3);
    e.topology.edges = {{0, 1}, {2, 3}};
    CHECK(error_code([&] { Simulation{e}; }) == Errc::InvalidTopology);
    e.topology.edges = {{0, 0}, {1, 2}, {2, 3}};
    CHECK(error_code([&] { Simulation{e}; }) == Errc::InvalidTopology);
    auto r = small(5, Topology::Kind::Random);
    r.topology.avg_degree = 0.5;
    CHECK(error_code([&] { Simulation{r}; }) == Errc::InvalidTopology);
}

TEST_CASE("bad delay distributions") {
    SimConfig c;
    c.link_delay.lo = Micros{300'000};
    c.link_delay.hi = Micros{50'000};
    CHECK(error_code([&] { Simulation{c}; }) == Errc::InvalidDistribution);
    c.link_delay = {DelayDistribution::Kind::Fixed, Micros{-1}, Micros{-1}};
    CHECK(error_code([&] { Simulation{c}; }) == Errc::InvalidDistribution);
}

TEST_CASE("build is deterministic in the seed") {
    SimConfig c;
    Simulation a(c), b(c);
    CHECK(a.initial_state_digest() == b.initial_state_digest());
    CHECK(a.peers().size() == 20);
    c.seed = 2;
    CHECK(Simulation(c).initial_state_digest() != a.initial_state_digest());
    for (auto off : a.clock_offsets()) CHECK(std::abs(off.count()) <= 2'000'000);
    CHECK(a.roots_agree());
    CHECK(a.registry().active_members() == 20);
}

TEST_CASE("empty run") {
    Simulation s(SimConfig{});
    auto r = s.run(Micros{0});
    CHECK(r["run"]["events"] == 0);
    CHECK(r["bundles"].empty());
    CHECK(r["decisions"]["relay"] == 0);
    CHECK(r["registry"]["conservation"] == true);
}

TEST_CASE("honest message floods the whole network") {
    Simulation s(scenario_honest());
    auto r = s.run();
    REQUIRE(s.bundles().size() == 1);
    const auto& b = s.bundles()[0];
    CHECK(b.accepted.size() == 19);
    for (const auto& [peer, n] : b.relays) CHECK(n <= 1);
    CHECK(r["decisions"]["slash_detected"] == 0);
    CHECK(r["bundles"][0]["coverage"] == 1.0);
    CHECK(s.script_errors().empty());
}

TEST_CASE("delivery respects link delays") {
    // With fixed 100 ms links a bundle cannot reach a peer faster than its hop
    // distance allows; on a ring of 10 the far side needs 5 hops.
    auto c = scenario_honest(small(10, Topology::Kind::Ring));
    c.link_delay = {DelayDistribution::Kind::Fixed, Micros{100'000}, Micros{100'000}};
    Simulation s(c);
    s.run(Micros{15'000'000 + 499'999});
    CHECK_FALSE(s.bundles()[0].received.contains(5));
    CHECK(s.bundles()[0].received.contains(4));
    CHECK(s.bundles()[0].received.contains(6));
    s.run(Micros{15'000'000 + 500'001});
    CHECK(s.bundles()[0].received.contains(5));
}

TEST_CASE("spammer is detected and slashed") {
    auto c = scenario_spammer();
    Simulation s(c);
    auto r = s.run();
    const auto spammer = s.peer(0).identity()->sk;
    REQUIRE_FALSE(s.detections().empty());
    for (const auto& d : s.detections()) CHECK(d.recovered_sk == spammer);
    CHECK_FALSE(s.registry().members()[0].has_value());
    CHECK(s.registry().rewards_paid() == c.deposit.reward());
    CHECK(s.registry().balances().size() == 1);
    CHECK(s.registry().conservation_holds());
    CHECK(s.roots_agree());
    CHECK(r["registry"]["members"][0] == "NIL");
}

TEST_CASE("identical messages are duplicates, not spam") {
    SpammerOptions o;
    o.identical_messages = true;
    Simulation s(scenario_spammer({}, o));
    s.run();
    CHECK(s.detections().empty());
    REQUIRE(s.bundles().size() == 1);
    CHECK(s.bundles()[0].accepted.size() == 19);
    for (const auto& [peer, n] : s.bundles()[0].relays) CHECK(n <= 1);
}

TEST_CASE("early withdrawal escapes the slash") {
    SpammerOptions o;
    o.early_withdraw = true;
    auto c = scenario_spammer({}, o);
    Simulation s(c);
    auto r = s.run();
    CHECK_FALSE(s.detections().empty());
    CHECK(s.registry().slashes() == 0);
    CHECK(s.registry().rewards_paid() == 0);
    CHECK(s.registry().refunds_paid() == c.deposit.s);
    CHECK(s.registry().fee_pool() == c.deposit.f * c.peers);
    CHECK(s.registry().escapes() > 0);
    CHECK(r["slashing"]["escape_flagged"] == true);
}

TEST_CASE("stale and future bundles stay with direct neighbours") {
    Simulation s(scenario_stale_epoch());
    auto r = s.run();
    REQUIRE(s.bundles().size() == 4);
    // offset -thr is still acceptable; the rest are outside the window
    CHECK(s.bundles()[0].accepted.size() == 19);
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(s.bundles()[i].accepted.empty());
        CHECK(r["bundles"][i]["received_beyond_neighbors"] == 0);
    }
    CHECK(r["decisions"]["drop_stale_epoch"] > 0);
    CHECK(r["decisions"]["drop_future_epoch"] > 0);
}

TEST_CASE("forged proofs are dropped at the first hop") {
    Simulation s(scenario_invalid_proof());
    auto r = s.run();
    std::size_t honest = 0;
    for (std::size_t i = 0; i < s.bundles().size(); ++i) {
        const auto& b = s.bundles()[i];
        if (b.kind == "forged") {
            CHECK(b.accepted.empty());
            CHECK(r["bundles"][i]["received_beyond_neighbors"] == 0);
        } else {
            ++honest;
            CHECK(b.accepted.size() == 19);
        }
    }
    CHECK(honest == 1);
    CHECK(r["decisions"]["drop_invalid_proof"] > 0);
}

TEST_CASE("slash race pays the earliest honest committer") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SimConfig base;
        base.seed = seed;
        Simulation s(scenario_slash_race(base));
        s.run();
        CHECK(s.registry().slashes() == 1);
        CHECK(s.registry().balances().size() == 1);
        CHECK_FALSE(s.registry().balances().contains("peer-3"));
        CHECK(s.detections().size() >= 2);
    }
}

TEST_CASE("withheld commit expires and the second slasher is paid") {
    Simulation s(scenario_slash_race({}, SlashRaceOptions{true}));
    s.run();
    CHECK(s.registry().slashes() == 1);
    CHECK(s.registry().balance("peer-2") == s.config().deposit.reward());
}

TEST_CASE("extra identities buy extra quota, double signalling still slashes") {
    {
        Simulation s(scenario_multi_registration());
        auto r = s.run();
        CHECK(r["actors"]["peer-0"]["extra_identities"] == 3);
        // four deposits: the original identity plus three extra
        CHECK(r["actors"]["peer-0"]["registration_cost"] == 400);
        CHECK(r["actors"]["peer-0"]["max_messages_per_epoch"] == 3);
        CHECK(s.detections().empty());
    }
    {
        MultiRegistrationOptions o;
        o.reuse_identity = true;
        Simulation s(scenario_multi_registration({}, o));
        s.run();
        CHECK(s.registry().slashes() == 3);
        CHECK(s.registry().conservation_holds());
    }
}

TEST_CASE("reports are reproducible and both renderings agree") {
    auto c = scenario_spammer();
    auto r1 = Simulation(c).run();
    auto r2 = Simulation(c).run();
    CHECK(r1.to_text() == r2.to_text());
    CHECK(r1.to_machine() == r2.to_machine());
    CHECK(flatten_report(r1.to_text()) == flatten_report(r1.to_machine()));
    CHECK(diff_reports(flatten_report(r1.to_text()), flatten_report(r2.to_machine())).empty());

    c.seed = 9;
    auto r3 = Simulation(c).run();
    auto d = diff_reports(flatten_report(r1.to_text()), flatten_report(r3.to_text()));
    CHECK_FALSE(d.empty());
    CHECK(std::any_of(d.begin(), d.end(), [](const std::string& l) { return l.rfind("run.seed: 1 | 9", 0) == 0; }));
    CHECK(error_code([] { flatten_report("[run]\nno equals sign\n"); }) == Errc::ConfigParse);
}

TEST_CASE("script errors are reported, not fatal") {
    SimConfig c;
    c.script.push_back(ScriptStep{Micros{1'000'000}, 0, RegisterAction{}});  // already a member
    c.script.push_back(ScriptStep{Micros{15'000'000}, 1, PublishAction{"a"}});
    c.script.push_back(ScriptStep{Micros{16'000'000}, 1, PublishAction{"b"}});  // local rate limit
    Simulation s(c);
    auto r = s.run();
    CHECK(s.script_errors().size() == 2);
    CHECK(r["script_errors"]["count"] == 2);
}

TEST_CASE("config parsing") {
    auto c = parse_config(R"({"seed": 3, "peers": 5, "epoch": {"T": 10, "network_delay": 1.5, "clock_asynchrony": 0},
        "topology": {"kind": "ring"}, "link_delay": {"kind": "fixed", "value": 0.2},
        "script": [{"time": 2.5, "actor": 1, "action": "spam", "messages": ["a", "b"], "targets": [0, 2]}]})");
    CHECK(c.seed == 3);
    CHECK(c.epoch.length.count() == 10);
    CHECK(c.epoch.thr == 1);
    CHECK(c.epoch.network_delay == Micros{1'500'000});
    CHECK(c.link_delay.kind == DelayDistribution::Kind::Fixed);
    CHECK(c.link_delay.lo == Micros{200'000});
    REQUIRE(c.script.size() == 1);
    CHECK(c.script[0].time == Micros{2'500'000});
    CHECK(std::get<SpamAction>(c.script[0].action).targets == std::vector<std::size_t>{0, 2});

    std::string msg;
    CHECK(config_error(R"({"epoch": {"T": 0}})", &msg) == Errc::ConfigValidation);
    CHECK(msg.find("epoch.T") != std::string::npos);
    CHECK(config_error(R"({"peers": 5, "colour": 1})", &msg) == Errc::ConfigValidation);
    CHECK(msg.find("colour") != std::string::npos);
    CHECK(config_error(R"({"epoch": {"T": 30, "period": 2}})", &msg) == Errc::ConfigValidation);
    CHECK(msg.find("epoch.period") != std::string::npos);
    CHECK(config_error(R"({"script": [{"time": 1, "actor": 0, "action": "dance"}]})", &msg) ==
          Errc::ConfigValidation);
    CHECK(msg.find("script[0].action") != std::string::npos);
    CHECK(config_error(R"({"peers": 3, "slashers": [7]})") == Errc::ConfigValidation);
    CHECK(config_error("{not json") == Errc::ConfigParse);
    CHECK(config_error(R"({"deposit": {"v": 100, "f": 20, "s": 90}})") == Errc::ConfigValidation);
}

TEST_CASE("empty string values survive the text rendering") {
    SimReport r;
    r.data["s"] = {{"empty", ""}, {"x", 1}};
    auto flat = flatten_report(r.to_text());
    CHECK(flat.at("s.empty").empty());
    CHECK(flat == flatten_report(r.to_machine()));
}
