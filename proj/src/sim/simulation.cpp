#include "rln/sim/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "rln/errors.hpp"
#include "rln/hash.hpp"

namespace rln::sim {

namespace {

enum Stream : std::uint64_t {
    kProofKey = 1,
    kForger = 2,
    kTopology = 3,
    kOffsets = 4,
    kKeys = 5,
    kDelays = 6,
    kSalts = 7,
    kOrdering = 8,
    kActors = 9,
};

std::vector<bool> flags(std::size_t n, const std::vector<std::size_t>& set) {
    std::vector<bool> out(n, false);
    for (auto i : set) out[i] = true;
    return out;
}

double coverage(const BundleRecord& r, std::size_t peers) {
    auto reached = r.accepted;
    reached.insert(r.origin);
    return static_cast<double>(reached.size()) / static_cast<double>(peers);
}

std::string_view to_string(AttemptState s) {
    switch (s) {
        case AttemptState::Committed: return "committed";
        case AttemptState::Rewarded: return "rewarded";
        case AttemptState::GaveUp: return "gave_up";
        case AttemptState::Withheld: return "withheld";
    }
    return "unknown";
}

}  // namespace

Simulation::Simulation(SimConfig config)
    : config_(std::move(config)),
      backend_(std::make_shared<MockBackend>(MockBackend::from_seed(derive_seed(config_.seed, kProofKey)))),
      forger_(derive_seed(config_.seed, kForger)),
      registry_(RegistryConfig{config_.deposit, config_.registry.commit_window}),
      delay_rng_(derive_seed(config_.seed, kDelays)),
      salt_rng_(derive_seed(config_.seed, kSalts)),
      order_rng_(derive_seed(config_.seed, kOrdering)),
      actor_rng_(derive_seed(config_.seed, kActors)) {
    validate(config_);
    const auto& d = config_.link_delay;
    if (d.lo.count() < 0 || d.hi.count() < 0 ||
        (d.kind == DelayDistribution::Kind::Uniform && d.lo > d.hi)) {
        throw Error(Errc::InvalidDistribution, "link_delay: need 0 <= lo <= hi");
    }
    if (config_.clock_offset_max.count() < 0) throw Error(Errc::InvalidDistribution, "clock_offset_max must be >= 0");

    const std::size_t n = config_.peers;
    Rng topo_rng(derive_seed(config_.seed, kTopology));
    build_topology(topo_rng);

    Rng offset_rng(derive_seed(config_.seed, kOffsets));
    const auto a = config_.clock_offset_max.count();
    for (std::size_t i = 0; i < n; ++i) offsets_.emplace_back(uniform_between(offset_rng, -a, a));

    Rng key_rng(derive_seed(config_.seed, kKeys));
    peers_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        PeerConfig pc;
        pc.epoch = config_.epoch;
        pc.clock_offset = offsets_[i];
        pc.seen_capacity = config_.seen_capacity;
        pc.root_window = config_.root_window;
        pc.tree_depth = config_.tree_depth;
        peers_.emplace_back("peer-" + std::to_string(i), pc, backend_);
        peers_.back().set_identity(keygen(key_rng));
    }

    std::vector<std::size_t> members;
    if (config_.members) {
        members = *config_.members;
    } else {
        for (std::size_t i = 0; i < n; ++i) members.push_back(i);
    }
    for (auto m : members) {
        registry_.register_member(peers_[m].identity()->pk, config_.deposit.v, peers_[m].account());
        registration_cost_[m] += config_.deposit.v;
    }
    for (auto& p : peers_) p.sync_tree(registry_);

    copier_ = flags(n, config_.copiers);
    withholds_ = flags(n, config_.withhold_reveal);
    slasher_.assign(n, config_.slashers == std::nullopt);
    if (config_.slashers) {
        for (auto s : *config_.slashers) slasher_[s] = true;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (copier_[i]) slasher_[i] = false;
    }
    reported_.resize(n);

    for (std::size_t i = 0; i < config_.script.size(); ++i) schedule(config_.script[i].time, StepDue{i});
    schedule(config_.effective_sync_interval(), Tick{});
    if (config_.registry.block_interval.count() > 0) schedule(config_.registry.block_interval, BlockDue{});

    ByteWriter w;
    w.put_u64(n);
    for (const auto& [x, y] : edges_) {
        w.put_u64(x);
        w.put_u64(y);
    }
    for (auto o : offsets_) w.put_u64(static_cast<std::uint64_t>(o.count()));
    for (const auto& p : peers_) w.put_raw(p.identity()->pk.to_bytes());
    w.put_raw(registry_.oracle_root(config_.tree_depth).to_bytes());
    initial_digest_ = to_hex(sha256(w.bytes()));
}

void Simulation::build_topology(Rng& rng) {
    const std::size_t n = config_.peers;
    std::set<std::pair<std::size_t, std::size_t>> edges;
    auto add = [&](std::size_t a, std::size_t b) {
        if (a == b) throw Error(Errc::InvalidTopology, "self-loop at peer " + std::to_string(a));
        edges.emplace(std::min(a, b), std::max(a, b));
    };

    switch (config_.topology.kind) {
        case Topology::Kind::Complete:
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) add(i, j);
            break;
        case Topology::Kind::Ring:
            for (std::size_t i = 0; i < n; ++i) add(i, (i + 1) % n);
            break;
        case Topology::Kind::Random: {
            const double deg = config_.topology.avg_degree;
            if (!(deg >= 1.0)) throw Error(Errc::InvalidTopology, "topology.avg_degree must be >= 1");
            const std::size_t max_edges = n * (n - 1) / 2;
            auto target = static_cast<std::size_t>(std::llround(static_cast<double>(n) * deg / 2.0));
            target = std::clamp(target, n - 1, max_edges);
            std::vector<std::size_t> order(n);
            for (std::size_t i = 0; i < n; ++i) order[i] = i;
            shuffle(order, rng);
            // Random spanning tree first so the graph is connected.
            for (std::size_t i = 1; i < n; ++i) add(order[i], order[uniform_below(rng, i)]);
            while (edges.size() < target) {
                auto a = uniform_below(rng, n);
                auto b = uniform_below(rng, n);
                if (a != b) add(a, b);
            }
            break;
        }
        case Topology::Kind::Explicit:
            for (const auto& [a, b] : config_.topology.edges) {
                if (a >= n || b >= n) throw Error(Errc::InvalidTopology, "edge endpoint out of range");
                add(a, b);
            }
            break;
    }

    edges_.assign(edges.begin(), edges.end());
    adjacency_.assign(n, {});
    for (const auto& [a, b] : edges_) {
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());

    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        auto v = stack.back();
        stack.pop_back();
        for (auto u : adjacency_[v]) {
            if (!seen[u]) {
                seen[u] = true;
                ++reached;
                stack.push_back(u);
            }
        }
    }
    if (reached != n) throw Error(Errc::InvalidTopology, "topology is not connected");
}

void Simulation::schedule(Micros at, Payload payload) { queue_.push(Event{at, next_seq_++, std::move(payload)}); }

Micros Simulation::sample_delay() {
    const auto& d = config_.link_delay;
    if (d.kind == DelayDistribution::Kind::Fixed) return d.lo;
    return Micros{uniform_between(delay_rng_, d.lo.count(), d.hi.count())};
}

void Simulation::mix_trace(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        trace_ ^= (v >> (8 * i)) & 0xff;
        trace_ *= 0x100000001b3ULL;
    }
}

std::string Simulation::trace_digest() const {
    ByteWriter w;
    w.put_u64(trace_);
    return to_hex(w.bytes());
}

std::size_t Simulation::new_record(const MessageBundle& bundle, std::size_t origin, std::string kind) {
    auto id = bundle.id();
    for (std::size_t i = 0; i < bundles_.size(); ++i) {
        if (bundles_[i].id == id) return i;
    }
    BundleRecord r;
    r.origin = origin;
    r.kind = std::move(kind);
    r.epoch = bundle.epoch;
    r.id = id;
    bundles_.push_back(std::move(r));
    return bundles_.size() - 1;
}

void Simulation::send(std::shared_ptr<const MessageBundle> bundle, std::size_t record, std::size_t from,
                      std::size_t to) {
    schedule(now_ + sample_delay(), Deliver{std::move(bundle), record, from, to});
}

void Simulation::flood(const MessageBundle& bundle, std::size_t origin, std::string kind) {
    auto record = new_record(bundle, origin, std::move(kind));
    auto shared = std::make_shared<const MessageBundle>(bundle);
    for (auto n : adjacency_[origin]) send(shared, record, origin, n);
}

SimReport Simulation::run(Micros until) {
    while (!queue_.empty() && queue_.top().time < until) {
        Event e = queue_.top();
        queue_.pop();
        now_ = e.time;
        ++events_processed_;
        mix_trace(static_cast<std::uint64_t>(e.time.count()));
        mix_trace(e.seq);
        mix_trace(e.payload.index());
        std::visit([this](const auto& p) { handle(p); }, e.payload);
    }
    return report();
}

void Simulation::handle(const Deliver& d) {
    auto& record = bundles_[d.record];
    record.received.insert(d.to);
    auto decision = peers_[d.to].on_receive(*d.bundle, wall(now_));
    ++decisions_[static_cast<std::size_t>(decision.kind)];
    mix_trace(d.to);
    mix_trace(static_cast<std::uint64_t>(decision.kind));

    if (decision.kind == Decision::Relay) {
        record.accepted.insert(d.to);
        ++record.relays[d.to];
        for (auto n : adjacency_[d.to]) {
            if (n != d.from) send(d.bundle, d.record, d.to, n);
        }
    } else if (decision.kind == Decision::SlashDetected) {
        const auto& sk = *decision.recovered_sk;
        detections_.push_back(Detection{d.to, now_, sk, d.record});
        if (slasher_[d.to] && !reported_[d.to].contains(sk)) start_attempt(d.to, sk, false);
    }
}

void Simulation::handle(const StepDue& s) {
    const auto& step = config_.script[s.index];
    try {
        perform(step.actor, step.action);
    } catch (const Error& e) {
        script_errors_.push_back("script[" + std::to_string(s.index) + "] " + std::string(action_name(step.action)) +
                                 ": " + e.what());
    }
}

void Simulation::handle(const Tick&) {
    for (auto& p : peers_) {
        p.sync_tree(registry_);
        p.prune_nullifier_map(wall(now_));
    }
    schedule(now_ + config_.effective_sync_interval(), Tick{});
}

void Simulation::handle(const BlockDue&) {
    std::vector<PendingTx> ready, waiting;
    for (auto& p : mempool_) (p.ready <= now_ ? ready : waiting).push_back(std::move(p));
    mempool_ = std::move(waiting);
    if (config_.registry.ordering == RegistrySimConfig::Ordering::Random) shuffle(ready, order_rng_);
    for (const auto& p : ready) apply_tx(p.tx);
    schedule(now_ + config_.registry.block_interval, BlockDue{});
}

void Simulation::handle(const RevealDue& r) {
    auto& attempt = attempts_[r.attempt];
    if (attempt.state != AttemptState::Committed) return;
    submit(TxReveal{r.attempt});
    if (attempt.copier) return;
    // The plain key is now visible in the mempool.
    for (std::size_t c = 0; c < peers_.size(); ++c) {
        if (!copier_[c] || reported_[c].contains(attempt.sk)) continue;
        reported_[c].insert(attempt.sk);
        schedule(now_ + config_.copier_reaction, CopierDue{c, attempt.sk});
    }
}

void Simulation::handle(const CopierDue& c) { start_attempt(c.copier, c.sk, true); }

void Simulation::start_attempt(std::size_t peer, const FieldElement& sk, bool copier) {
    reported_[peer].insert(sk);
    SlashAttempt a;
    a.peer = peer;
    a.copier = copier;
    a.sk = sk;
    attempts_.push_back(std::move(a));
    commit_attempt(attempts_.size() - 1);
}

void Simulation::commit_attempt(std::size_t index) {
    auto& attempt = attempts_[index];
    attempt.salt = random_bytes(salt_rng_, 16);
    auto request = peers_[attempt.peer].initiate_slash(attempt.sk, attempt.salt);
    submit(TxCommit{index, request.commitment});
    if (attempt.copier) {
        submit(TxReveal{index});
    } else if (withholds_[attempt.peer]) {
        attempt.state = AttemptState::Withheld;
    } else {
        schedule(now_ + config_.reveal_delay, RevealDue{index});
    }
}

void Simulation::submit(Tx tx) {
    const auto ready = now_ + config_.registry.confirmation_latency;
    if (config_.registry.block_interval.count() == 0) {
        schedule(ready, TxDue{std::move(tx)});
    } else {
        mempool_.push_back(PendingTx{ready, next_seq_++, std::move(tx)});
    }
}

void Simulation::apply_tx(const Tx& tx) {
    struct Apply {
        Simulation& sim;

        void operator()(const TxRegister& t) const {
            try {
                sim.registry_.register_member(t.pk, sim.config_.deposit.v, sim.peers_[t.actor].account());
            } catch (const Error& e) {
                sim.script_errors_.push_back("register by peer " + std::to_string(t.actor) + ": " + e.what());
            }
        }
        void operator()(const TxWithdraw& t) const {
            try {
                sim.registry_.withdraw(t.sk, sim.peers_[t.actor].account());
            } catch (const Error& e) {
                sim.script_errors_.push_back("withdraw by peer " + std::to_string(t.actor) + ": " + e.what());
            }
        }
        void operator()(const TxCommit& t) const {
            sim.registry_.slash_commit(t.commitment, sim.peers_[sim.attempts_[t.attempt].peer].account());
        }
        void operator()(const TxReveal& t) const {
            auto& a = sim.attempts_[t.attempt];
            ++a.reveals;
            try {
                sim.registry_.slash_reveal(a.sk, sim.peers_[a.peer].account(), a.salt);
                a.state = AttemptState::Rewarded;
                a.last_outcome = "ok";
                ++sim.reveal_outcomes_["ok"];
                return;
            } catch (const Error& e) {
                a.last_outcome = std::string(to_string(e.code()));
                ++sim.reveal_outcomes_[a.last_outcome];
                const bool may_retry = a.reveals < sim.config_.max_reveal_attempts;
                switch (e.code()) {
                    case Errc::RevealNotEarliest:
                    case Errc::NoMatchingCommit:
                        if (may_retry) {
                            sim.schedule(sim.now_ + sim.config_.retry_delay, RevealDue{t.attempt});
                        } else {
                            a.state = AttemptState::GaveUp;
                        }
                        break;
                    case Errc::CommitExpired:
                        if (may_retry) {
                            sim.commit_attempt(t.attempt);
                        } else {
                            a.state = AttemptState::GaveUp;
                        }
                        break;
                    default:
                        a.state = AttemptState::GaveUp;
                        break;
                }
            }
        }
    };
    mix_trace(tx.index());
    std::visit(Apply{*this}, tx);
}

std::optional<std::uint64_t> Simulation::leaf_of(const Peer& p, const FieldElement& pk) const {
    for (const auto& [index, leaf] : p.tree().leaves()) {
        if (leaf == pk) return index;
    }
    return std::nullopt;
}

void Simulation::perform(std::size_t actor, const Action& action) {
    auto& peer = peers_[actor];
    const auto now = wall(now_);

    if (const auto* a = std::get_if<PublishAction>(&action)) {
        flood(peer.publish(a->message, now), actor, "honest");
    } else if (const auto* a = std::get_if<SpamAction>(&action)) {
        if (!peer.member_index()) throw Error(Errc::NotRegistered, peer.account() + " cannot spam");
        if (adjacency_[actor].empty()) throw Error(Errc::InvalidTopology, "spammer has no neighbors");
        const auto epoch = peer.local_epoch(now);
        for (std::size_t i = 0; i < a->messages.size(); ++i) {
            auto bundle = build_bundle(*peer.identity(), peer.tree(), *peer.member_index(), as_bytes(a->messages[i]),
                                       epoch, *backend_);
            peer.remember_own(bundle);
            const auto target =
                a->targets.empty() ? adjacency_[actor][i % adjacency_[actor].size()] : a->targets[i];
            auto record = new_record(bundle, actor, "spam");
            send(std::make_shared<const MessageBundle>(std::move(bundle)), record, actor, target);
        }
    } else if (const auto* a = std::get_if<EpochShiftAction>(&action)) {
        if (!peer.member_index()) throw Error(Errc::NotRegistered, peer.account() + " cannot publish");
        const auto current = static_cast<std::int64_t>(peer.local_epoch(now).index);
        for (auto offset : a->offsets) {
            Epoch epoch{static_cast<std::uint64_t>(std::max<std::int64_t>(0, current + offset))};
            auto m = a->message + "@" + std::to_string(offset);
            auto bundle = build_bundle(*peer.identity(), peer.tree(), *peer.member_index(), as_bytes(m), epoch,
                                       *backend_);
            peer.remember_own(bundle);
            flood(bundle, actor, "shifted");
        }
    } else if (const auto* a = std::get_if<ForgeAction>(&action)) {
        const auto epoch = peer.local_epoch(now);
        for (std::size_t i = 0; i < a->count; ++i) {
            auto m = a->message + "#" + std::to_string(i);
            auto sk = random_field_element(actor_rng_);
            MessageBundle b;
            b.payload = to_bytes(m);
            b.share = compute_share(sk, epoch, m);
            b.nullifier = compute_internal_nullifier(sk, epoch);
            b.epoch = epoch;
            b.root = peer.root();
            b.proof = forger_.forge(b.public_inputs());
            peer.remember_own(b);
            flood(b, actor, "forged");
        }
    } else if (std::holds_alternative<RegisterAction>(action)) {
        registration_cost_[actor] += config_.deposit.v;
        submit(TxRegister{actor, peer.identity()->pk});
    } else if (std::holds_alternative<WithdrawAction>(action)) {
        submit(TxWithdraw{actor, peer.identity()->sk});
    } else if (const auto* a = std::get_if<MultiRegisterAction>(&action)) {
        for (std::size_t i = 0; i < a->k; ++i) {
            auto id = keygen(actor_rng_);
            sybils_[actor].push_back(id);
            registration_cost_[actor] += config_.deposit.v;
            submit(TxRegister{actor, id.pk});
        }
    } else if (const auto* a = std::get_if<MultiPublishAction>(&action)) {
        const auto epoch = peer.local_epoch(now);
        const auto it = sybils_.find(actor);
        if (it == sybils_.end()) throw Error(Errc::NotRegistered, peer.account() + " has no extra identities");
        for (std::size_t j = 0; j < it->second.size(); ++j) {
            const auto& id = it->second[j];
            auto leaf = leaf_of(peer, id.pk);
            if (!leaf) throw Error(Errc::NotRegistered, "extra identity " + std::to_string(j) + " not in local tree");
            auto m = a->message + "#" + std::to_string(j);
            auto bundle = build_bundle(id, peer.tree(), *leaf, as_bytes(m), epoch, *backend_);
            peer.remember_own(bundle);
            flood(bundle, actor, "sybil");
        }
    }
}

bool Simulation::roots_agree() const {
    const auto oracle = registry_.oracle_root(config_.tree_depth);
    return std::all_of(peers_.begin(), peers_.end(), [&](const Peer& p) { return p.root() == oracle; });
}

SimReport Simulation::report() const {
    using ojson = nlohmann::ordered_json;
    SimReport r;
    auto& d = r.data;
    const auto n = peers_.size();

    ojson run;
    run["seed"] = config_.seed;
    run["peers"] = n;
    run["links"] = edges_.size();
    run["epoch_length_s"] = config_.epoch.length.count();
    run["thr"] = config_.epoch.thr;
    run["until_us"] = config_.until.count();
    run["end_time_us"] = now_.count();
    run["events"] = events_processed_;
    run["trace_digest"] = trace_digest();
    d["run"] = run;

    ojson decisions;
    for (std::size_t i = 0; i < kDecisionCount; ++i) {
        decisions[std::string(to_string(static_cast<Decision>(i)))] = decisions_[i];
    }
    d["decisions"] = decisions;

    ojson reg;
    ojson members = ojson::array();
    for (const auto& m : registry_.members()) members.push_back(m ? m->to_hex() : "NIL");
    reg["members"] = members;
    reg["active_members"] = registry_.active_members();
    reg["total_paid_in"] = registry_.total_paid_in();
    reg["active_deposits"] = registry_.active_deposits();
    reg["fee_pool"] = registry_.fee_pool();
    reg["rewards_paid"] = registry_.rewards_paid();
    reg["refunds_paid"] = registry_.refunds_paid();
    reg["conservation"] = registry_.conservation_holds();
    reg["slashes"] = registry_.slashes();
    reg["transactions"] = registry_.tx_count();
    d["registry"] = reg;

    ojson rewards = ojson::object();
    for (const auto& [account, amount] : registry_.balances()) rewards[account] = amount;
    d["rewards"] = rewards;

    ojson slashing;
    slashing["detections"] = detections_.size();
    std::set<FieldElement> recovered;
    for (const auto& det : detections_) recovered.insert(det.recovered_sk);
    ojson rec = ojson::array();
    for (const auto& sk : recovered) rec.push_back(sk.to_hex());
    slashing["recovered_keys"] = rec;
    slashing["attempts"] = attempts_.size();
    ojson outcomes = ojson::object();
    for (const auto& [k, v] : reveal_outcomes_) outcomes[k] = v;
    slashing["reveal_outcomes"] = outcomes;
    slashing["escapes"] = registry_.escapes();
    slashing["escape_flagged"] = registry_.escapes() > 0;
    ojson attempts = ojson::array();
    for (const auto& a : attempts_) {
        ojson j;
        j["peer"] = a.peer;
        j["copier"] = a.copier;
        j["reveals"] = a.reveals;
        j["state"] = to_string(a.state);
        j["last_outcome"] = a.last_outcome;
        attempts.push_back(j);
    }
    slashing["by_attempt"] = attempts;
    d["slashing"] = slashing;

    ojson trees;
    const auto oracle = registry_.oracle_root(config_.tree_depth);
    std::size_t agreeing = 0;
    for (const auto& p : peers_) agreeing += p.root() == oracle ? 1 : 0;
    trees["oracle_root"] = oracle.to_hex();
    trees["peers_in_agreement"] = agreeing;
    trees["root_agreement"] = agreeing == n;
    d["trees"] = trees;

    ojson bundles = ojson::array();
    for (const auto& b : bundles_) {
        const auto& nb = adjacency_[b.origin];
        auto beyond = [&](const std::set<std::size_t>& s) {
            return std::count_if(s.begin(), s.end(), [&](std::size_t p) {
                return p != b.origin && !std::binary_search(nb.begin(), nb.end(), p);
            });
        };
        std::size_t max_relays = 0;
        for (const auto& [_, c] : b.relays) max_relays = std::max(max_relays, c);
        ojson j;
        j["id"] = b.id.to_hex();
        j["origin"] = b.origin;
        j["kind"] = b.kind;
        j["epoch"] = b.epoch.index;
        j["received"] = b.received.size();
        j["accepted"] = b.accepted.size();
        j["coverage"] = coverage(b, n);
        j["received_beyond_neighbors"] = beyond(b.received);
        j["accepted_beyond_neighbors"] = beyond(b.accepted);
        j["max_relays_per_peer"] = max_relays;
        bundles.push_back(j);
    }
    d["bundles"] = bundles;

    ojson actors = ojson::object();
    for (const auto& [actor, ids] : sybils_) {
        std::map<std::uint64_t, std::size_t> per_epoch;
        for (const auto& b : bundles_) {
            if (b.origin == actor && b.kind == "sybil" && !b.accepted.empty()) ++per_epoch[b.epoch.index];
        }
        std::size_t max_rate = 0;
        for (const auto& [_, c] : per_epoch) max_rate = std::max(max_rate, c);
        ojson j;
        j["extra_identities"] = ids.size();
        j["registration_cost"] = registration_cost_.count(actor) ? registration_cost_.at(actor) : 0;
        j["max_messages_per_epoch"] = max_rate;
        actors["peer-" + std::to_string(actor)] = j;
    }
    d["actors"] = actors;

    ojson errors = ojson::array();
    for (const auto& e : script_errors_) errors.push_back(e);
    d["script_errors"] = ojson{{"count", script_errors_.size()}, {"messages", errors}};
    return r;
}

}  // namespace rln::sim
