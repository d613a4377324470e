#include "rln/sim/scenarios.hpp"

#include <algorithm>

namespace rln::sim {

namespace {
constexpr Micros kSecond{1'000'000};
}

SimConfig scenario_spammer(SimConfig base, const SpammerOptions& opts) {
    SpamAction spam;
    spam.messages = {"spam-1", opts.identical_messages ? "spam-1" : "spam-2"};
    base.script.push_back(ScriptStep{opts.at, opts.spammer, spam});
    if (opts.early_withdraw) base.script.push_back(ScriptStep{opts.at + opts.withdraw_after, opts.spammer, WithdrawAction{}});
    return base;
}

SimConfig scenario_stale_epoch(SimConfig base, const StaleEpochOptions& opts) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < base.peers; ++i) {
        if (i != opts.attacker) members.push_back(i);
    }
    base.members = members;
    auto offsets = opts.offsets;
    if (offsets.empty()) {
        const auto thr = static_cast<std::int64_t>(base.epoch.thr);
        offsets = {-thr, -(thr + 1), -(thr + 2), thr + 1};
    }
    base.script.push_back(ScriptStep{kSecond, opts.attacker, RegisterAction{}});
    base.script.push_back(ScriptStep{opts.at, opts.attacker, EpochShiftAction{offsets, "backfill"}});
    return base;
}

SimConfig scenario_invalid_proof(SimConfig base, const InvalidProofOptions& opts) {
    const auto honest = opts.honest.value_or(base.peers - 1);
    base.script.push_back(ScriptStep{opts.at, opts.attacker, ForgeAction{opts.count, "forged"}});
    base.script.push_back(ScriptStep{opts.at + Micros{50'000}, honest, PublishAction{"honest-during-flood"}});
    return base;
}

SimConfig scenario_slash_race(SimConfig base, const SlashRaceOptions& opts) {
    base.peers = 5;
    base.topology = Topology{Topology::Kind::Complete, 4.0, {}};
    base.slashers = std::vector<std::size_t>{1, 2};
    base.registry.block_interval = kSecond;
    base.registry.ordering = RegistrySimConfig::Ordering::Random;
    if (opts.withhold_first) {
        base.withhold_reveal = {1};
        base.registry.commit_window = 8;
        base.retry_delay = kSecond;
    } else {
        base.copiers = {3};
    }
    SpamAction spam;
    spam.messages = {"race-1", "race-2"};
    spam.targets = {1, 2};
    base.script.push_back(ScriptStep{15 * kSecond, 0, spam});
    // Mirror the pair so both slashers hold both shares regardless of relay timing.
    spam.targets = {2, 1};
    base.script.push_back(ScriptStep{15 * kSecond + Micros{1'000}, 0, spam});
    return base;
}

SimConfig scenario_multi_registration(SimConfig base, const MultiRegistrationOptions& opts) {
    base.script.push_back(ScriptStep{kSecond, opts.actor, MultiRegisterAction{opts.k}});
    base.script.push_back(ScriptStep{45 * kSecond, opts.actor, MultiPublishAction{"quota"}});
    if (opts.reuse_identity) {
        base.script.push_back(ScriptStep{50 * kSecond, opts.actor, MultiPublishAction{"quota-again"}});
    }
    return base;
}

SimConfig scenario_honest(SimConfig base, std::size_t publisher) {
    base.script.push_back(ScriptStep{15 * kSecond, publisher, PublishAction{"hello"}});
    return base;
}

}  // namespace rln::sim
