#pragma once

#include <cstdint>
#include <vector>

#include "rln/sim/config.hpp"

namespace rln::sim {

// Builders that append scripted attacks to a base configuration. Script times
// assume the default start_time, which sits on an epoch boundary, so actions at
// 15 s / 45 s fall mid-epoch for every peer.

struct SpammerOptions {
    std::size_t spammer = 0;
    Micros at{15'000'000};
    bool identical_messages = false;  // same message twice: a duplicate, not a violation
    bool early_withdraw = false;      // withdraw right after spamming, before any reveal lands
    Micros withdraw_after{500'000};
};
SimConfig scenario_spammer(SimConfig base = {}, const SpammerOptions& opts = {});

struct StaleEpochOptions {
    std::size_t attacker = 0;
    Micros at{45'000'000};
    // Empty: {-thr, -(thr+1), -(thr+2), +(thr+1)}.
    std::vector<std::int64_t> offsets;
};
// The attacker is not a member at t = 0; it registers at t = 1 s.
SimConfig scenario_stale_epoch(SimConfig base = {}, const StaleEpochOptions& opts = {});

struct InvalidProofOptions {
    std::size_t attacker = 0;
    std::size_t count = 50;
    Micros at{15'000'000};
    // Honest publisher active during the flood; defaults to the last peer.
    std::optional<std::size_t> honest;
};
SimConfig scenario_invalid_proof(SimConfig base = {}, const InvalidProofOptions& opts = {});

struct SlashRaceOptions {
    // Peer 1 commits but never reveals; the commit window is shortened so it expires.
    bool withhold_first = false;
};
// Five peers, complete graph. Peer 0 sends both spam messages to peers 1 and 2, the only reporting
// slashers; peer 3 copies any reveal it sees. Registry transactions are batched
// into 1 s blocks and shuffled.
SimConfig scenario_slash_race(SimConfig base = {}, const SlashRaceOptions& opts = {});

struct MultiRegistrationOptions {
    std::size_t actor = 0;
    std::size_t k = 3;
    bool reuse_identity = false;  // second round in the same epoch: every extra key double-signals
};
SimConfig scenario_multi_registration(SimConfig base = {}, const MultiRegistrationOptions& opts = {});

// One honest publish from `publisher` at 15 s.
SimConfig scenario_honest(SimConfig base = {}, std::size_t publisher = 0);

}  // namespace rln::sim
