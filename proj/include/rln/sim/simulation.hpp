#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "rln/proof.hpp"
#include "rln/registry.hpp"
#include "rln/relay.hpp"
#include "rln/sim/config.hpp"
#include "rln/sim/report.hpp"

namespace rln::sim {

struct Detection {
    std::size_t peer = 0;
    Micros time{0};
    FieldElement recovered_sk;
    std::size_t bundle = 0;
};

struct BundleRecord {
    std::size_t origin = 0;
    std::string kind;  // honest | spam | shifted | forged | sybil
    Epoch epoch;
    FieldElement id;
    std::set<std::size_t> received;
    std::set<std::size_t> accepted;        // peers whose decision was Relay
    std::map<std::size_t, std::size_t> relays;  // peer -> times it forwarded
};

enum class AttemptState : std::uint8_t { Committed, Rewarded, GaveUp, Withheld };

struct SlashAttempt {
    std::size_t peer = 0;
    bool copier = false;
    FieldElement sk;
    Bytes salt;
    std::uint32_t reveals = 0;
    AttemptState state = AttemptState::Committed;
    std::string last_outcome;
};

// Deterministic discrete-event simulation of one gossip network sharing a registry.
// Single-threaded; independent instances may run concurrently.
class Simulation {
public:
    // Throws Error(InvalidTopology | InvalidDistribution | ConfigValidation).
    explicit Simulation(SimConfig config);

    // Processes events with fire time < until (sim time since start).
    SimReport run(Micros until);
    SimReport run() { return run(config_.until); }

    const SimConfig& config() const { return config_; }
    const std::vector<Peer>& peers() const { return peers_; }
    const Peer& peer(std::size_t i) const { return peers_.at(i); }
    const Registry& registry() const { return registry_; }
    const std::vector<std::vector<std::size_t>>& neighbors() const { return adjacency_; }
    std::size_t link_count() const { return edges_.size(); }
    const std::vector<Micros>& clock_offsets() const { return offsets_; }
    const std::vector<Detection>& detections() const { return detections_; }
    const std::vector<BundleRecord>& bundles() const { return bundles_; }
    const std::vector<SlashAttempt>& slash_attempts() const { return attempts_; }
    const std::array<std::uint64_t, kDecisionCount>& decision_counts() const { return decisions_; }
    const std::vector<std::string>& script_errors() const { return script_errors_; }
    Micros now() const { return now_; }

    // Digest over topology, clock offsets, identities and registry state.
    std::string initial_state_digest() const { return initial_digest_; }
    std::string trace_digest() const;

    bool roots_agree() const;
    SimReport report() const;

private:
    struct Deliver {
        std::shared_ptr<const MessageBundle> bundle;
        std::size_t record;
        std::size_t from;
        std::size_t to;
    };
    struct StepDue {
        std::size_t index;
    };
    struct Tick {};
    struct BlockDue {};
    struct RevealDue {
        std::size_t attempt;
    };
    struct CopierDue {
        std::size_t copier;
        FieldElement sk;
    };
    struct TxRegister {
        std::size_t actor;
        FieldElement pk;
    };
    struct TxWithdraw {
        std::size_t actor;
        FieldElement sk;
    };
    struct TxCommit {
        std::size_t attempt;
        FieldElement commitment;
    };
    struct TxReveal {
        std::size_t attempt;
    };
    using Tx = std::variant<TxRegister, TxWithdraw, TxCommit, TxReveal>;
    struct TxDue {
        Tx tx;
    };
    using Payload = std::variant<Deliver, StepDue, Tick, BlockDue, RevealDue, CopierDue, TxDue>;

    struct Event {
        Micros time;
        std::uint64_t seq;
        Payload payload;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };
    struct PendingTx {
        Micros ready;
        std::uint64_t seq;
        Tx tx;
    };

    void build_topology(Rng& rng);
    void schedule(Micros at, Payload payload);
    Micros wall(Micros sim_time) const { return Micros{config_.start_time * 1'000'000} + sim_time; }
    Micros sample_delay();
    std::size_t new_record(const MessageBundle& bundle, std::size_t origin, std::string kind);
    void send(std::shared_ptr<const MessageBundle> bundle, std::size_t record, std::size_t from, std::size_t to);
    void flood(const MessageBundle& bundle, std::size_t origin, std::string kind);

    void handle(const Deliver& d);
    void handle(const StepDue& s);
    void handle(const Tick&);
    void handle(const BlockDue&);
    void handle(const RevealDue& r);
    void handle(const CopierDue& c);
    void handle(const TxDue& t) { apply_tx(t.tx); }

    void perform(std::size_t actor, const Action& action);
    void submit(Tx tx);
    void apply_tx(const Tx& tx);
    void start_attempt(std::size_t peer, const FieldElement& sk, bool copier);
    void commit_attempt(std::size_t attempt);
    std::optional<std::uint64_t> leaf_of(const Peer& p, const FieldElement& pk) const;
    void mix_trace(std::uint64_t v);

    SimConfig config_;
    std::shared_ptr<const MockBackend> backend_;
    Forger forger_;
    Registry registry_;
    std::vector<Peer> peers_;
    std::vector<Micros> offsets_;
    std::vector<std::vector<std::size_t>> adjacency_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
    std::vector<bool> slasher_;
    std::vector<bool> copier_;
    std::vector<bool> withholds_;
    std::map<std::size_t, std::vector<Identity>> sybils_;
    std::map<std::size_t, Amount> registration_cost_;

    Rng delay_rng_;
    Rng salt_rng_;
    Rng order_rng_;
    Rng actor_rng_;

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t next_seq_ = 0;
    std::vector<PendingTx> mempool_;
    Micros now_{0};
    std::uint64_t events_processed_ = 0;
    std::uint64_t trace_ = 0xcbf29ce484222325ULL;
    std::string initial_digest_;

    std::array<std::uint64_t, kDecisionCount> decisions_{};
    std::vector<BundleRecord> bundles_;
    std::vector<Detection> detections_;
    std::vector<SlashAttempt> attempts_;
    std::map<std::string, std::uint64_t> reveal_outcomes_;
    std::vector<std::set<FieldElement>> reported_;  // per-peer sks already acted on
    std::vector<std::string> script_errors_;
};

}  // namespace rln::sim
