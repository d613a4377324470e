#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rln/epoch.hpp"
#include "rln/registry.hpp"
#include "rln/relay.hpp"

namespace rln::sim {

struct Topology {
    enum class Kind : std::uint8_t { Complete, Ring, Random, Explicit };
    Kind kind = Kind::Random;
    double avg_degree = 4.0;                                  // Random only
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // Explicit only
};

struct DelayDistribution {
    enum class Kind : std::uint8_t { Fixed, Uniform };
    Kind kind = Kind::Uniform;
    Micros lo{50'000};
    Micros hi{300'000};  // ignored for Fixed

    Micros max() const { return kind == Kind::Fixed ? lo : hi; }
};

// Script actions. Every action is performed by the step's actor peer.
struct PublishAction {
    std::string message;
};
// Bypasses the local rate limit: one bundle per message in the current epoch,
// message i sent only to targets[i] (defaults to the actor's i-th neighbor).
struct SpamAction {
    std::vector<std::string> messages;
    std::vector<std::size_t> targets;
};
// Honestly proven bundles for epochs current + offset, flooded to all neighbors.
struct EpochShiftAction {
    std::vector<std::int64_t> offsets;
    std::string message;
};
// Bundles with random proofs flooded to all neighbors.
struct ForgeAction {
    std::size_t count = 1;
    std::string message;
};
struct RegisterAction {};
struct WithdrawAction {};
// Registers k extra identities controlled by the actor.
struct MultiRegisterAction {
    std::size_t k = 1;
};
// One bundle per extra identity, flooded to all neighbors.
struct MultiPublishAction {
    std::string message;
};

using Action = std::variant<PublishAction, SpamAction, EpochShiftAction, ForgeAction, RegisterAction, WithdrawAction,
                            MultiRegisterAction, MultiPublishAction>;

std::string_view action_name(const Action& a);

struct ScriptStep {
    Micros time{0};
    std::size_t actor = 0;
    Action action;
};

struct RegistrySimConfig {
    enum class Ordering : std::uint8_t { Fifo, Random };
    std::uint64_t commit_window = 100;
    Micros confirmation_latency{0};
    Micros block_interval{0};  // 0: each transaction applies on its own
    Ordering ordering = Ordering::Fifo;
};

struct SimConfig {
    std::uint64_t seed = 1;
    std::size_t peers = 20;
    std::int64_t start_time = 1644810000;  // unix seconds at sim time 0
    Topology topology;
    DelayDistribution link_delay;
    Micros clock_offset_max{2'000'000};  // offsets uniform in [-max, +max]
    EpochConfig epoch = derive_epoch_config(std::chrono::seconds{30}, Micros{2'000'000}, Micros{4'000'000});
    DepositPolicy deposit;
    RegistrySimConfig registry;
    std::uint32_t tree_depth = MerkleTree::kDefaultDepth;
    std::optional<Micros> sync_interval;  // default T / 2
    std::size_t seen_capacity = 4096;
    std::size_t root_window = 10;

    std::optional<std::vector<std::size_t>> members;   // registered at t = 0; default all
    std::optional<std::vector<std::size_t>> slashers;  // peers that report detections; default all
    std::vector<std::size_t> copiers;                  // copy observed reveals
    std::vector<std::size_t> withhold_reveal;          // commit but never reveal

    Micros reveal_delay{2'000'000};
    Micros retry_delay{3'000'000};
    std::uint32_t max_reveal_attempts = 50;
    Micros copier_reaction{100'000};

    Micros until{120'000'000};
    std::vector<ScriptStep> script;

    Micros effective_sync_interval() const;
};

// Throws Error(ConfigValidation) naming the offending key.
void validate(const SimConfig& config);

// JSON text -> validated config. Unknown keys are errors.
// Throws Error(ConfigParse) or Error(ConfigValidation).
SimConfig parse_config(std::string_view json_text);
SimConfig load_config(const std::filesystem::path& path);

}  // namespace rln::sim
