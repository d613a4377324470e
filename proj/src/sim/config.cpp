#include "rln/sim/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rln/errors.hpp"

namespace rln::sim {

using nlohmann::json;

std::string_view action_name(const Action& a) {
    struct Visitor {
        std::string_view operator()(const PublishAction&) const { return "publish"; }
        std::string_view operator()(const SpamAction&) const { return "spam"; }
        std::string_view operator()(const EpochShiftAction&) const { return "epoch_shift"; }
        std::string_view operator()(const ForgeAction&) const { return "forge"; }
        std::string_view operator()(const RegisterAction&) const { return "register"; }
        std::string_view operator()(const WithdrawAction&) const { return "withdraw"; }
        std::string_view operator()(const MultiRegisterAction&) const { return "multi_register"; }
        std::string_view operator()(const MultiPublishAction&) const { return "multi_publish"; }
    };
    return std::visit(Visitor{}, a);
}

Micros SimConfig::effective_sync_interval() const {
    if (sync_interval) return *sync_interval;
    return std::chrono::duration_cast<Micros>(epoch.length) / 2;
}

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& why) {
    throw Error(Errc::ConfigValidation, "\"" + key + "\": " + why);
}

// Walks one JSON object, tracking which keys were consumed so leftovers can be
// reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) invalid(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key(std::string_view name) const { return path_.empty() ? std::string(name) : path_ + "." + std::string(name); }

    const json* find(std::string_view name) {
        auto it = j_.find(std::string(name));
        if (it == j_.end()) return nullptr;
        used_.insert(std::string(name));
        return &*it;
    }

    template <typename T>
    void read_uint(std::string_view name, T& out) {
        if (const auto* v = find(name)) {
            if (!v->is_number_integer() || v->get<std::int64_t>() < 0) invalid(key(name), "expected a non-negative integer");
            out = static_cast<T>(v->get<std::uint64_t>());
        }
    }

    void read_int(std::string_view name, std::int64_t& out) {
        if (const auto* v = find(name)) {
            if (!v->is_number_integer()) invalid(key(name), "expected an integer");
            out = v->get<std::int64_t>();
        }
    }

    void read_seconds(std::string_view name, Micros& out) {
        if (const auto* v = find(name)) out = seconds_value(*v, key(name));
    }

    void read_seconds(std::string_view name, std::optional<Micros>& out) {
        if (const auto* v = find(name)) out = seconds_value(*v, key(name));
    }

    double read_number(std::string_view name, double fallback) {
        if (const auto* v = find(name)) {
            if (!v->is_number()) invalid(key(name), "expected a number");
            return v->get<double>();
        }
        return fallback;
    }

    void read_string(std::string_view name, std::string& out) {
        if (const auto* v = find(name)) {
            if (!v->is_string()) invalid(key(name), "expected a string");
            out = v->get<std::string>();
        }
    }

    void read_index_list(std::string_view name, std::vector<std::size_t>& out) {
        if (const auto* v = find(name)) out = index_list(*v, key(name));
    }

    void read_index_list_or_all(std::string_view name, std::optional<std::vector<std::size_t>>& out) {
        if (const auto* v = find(name)) {
            if (v->is_string() && v->get<std::string>() == "all") {
                out.reset();
            } else {
                out = index_list(*v, key(name));
            }
        }
    }

    void finish() const {
        for (const auto& [k, _] : j_.items()) {
            if (!used_.contains(k)) invalid(key(k), "unknown key");
        }
    }

    static Micros seconds_value(const json& v, const std::string& key) {
        if (!v.is_number()) invalid(key, "expected seconds as a number");
        double s = v.get<double>();
        if (!std::isfinite(s) || s < 0) invalid(key, "must be a non-negative number of seconds");
        return Micros{std::llround(s * 1e6)};
    }

    static std::vector<std::size_t> index_list(const json& v, const std::string& key) {
        if (!v.is_array()) invalid(key, "expected an array of peer indices");
        std::vector<std::size_t> out;
        for (const auto& e : v) {
            if (!e.is_number_integer() || e.get<std::int64_t>() < 0) invalid(key, "expected non-negative integers");
            out.push_back(e.get<std::size_t>());
        }
        return out;
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

void parse_topology(Section s, Topology& t) {
    std::string kind = "random";
    s.read_string("kind", kind);
    if (kind == "complete") {
        t.kind = Topology::Kind::Complete;
    } else if (kind == "ring") {
        t.kind = Topology::Kind::Ring;
    } else if (kind == "random") {
        t.kind = Topology::Kind::Random;
        t.avg_degree = s.read_number("avg_degree", t.avg_degree);
    } else if (kind == "explicit") {
        t.kind = Topology::Kind::Explicit;
        const auto* edges = s.find("edges");
        if (!edges || !edges->is_array()) invalid(s.key("edges"), "explicit topology needs an edge array");
        for (const auto& e : *edges) {
            auto pair = Section::index_list(e, s.key("edges"));
            if (pair.size() != 2) invalid(s.key("edges"), "each edge is a pair [a, b]");
            t.edges.emplace_back(pair[0], pair[1]);
        }
    } else {
        invalid(s.key("kind"), "expected complete | ring | random | explicit");
    }
    s.finish();
}

void parse_delay(Section s, DelayDistribution& d) {
    std::string kind = "uniform";
    s.read_string("kind", kind);
    if (kind == "fixed") {
        d.kind = DelayDistribution::Kind::Fixed;
        s.read_seconds("value", d.lo);
        d.hi = d.lo;
    } else if (kind == "uniform") {
        d.kind = DelayDistribution::Kind::Uniform;
        s.read_seconds("lo", d.lo);
        s.read_seconds("hi", d.hi);
    } else {
        invalid(s.key("kind"), "expected fixed | uniform");
    }
    s.finish();
}

void parse_epoch(Section s, EpochConfig& e) {
    std::int64_t length = e.length.count();
    s.read_int("T", length);
    if (length < 1) invalid(s.key("T"), "epoch length must be >= 1 second");
    e.length = std::chrono::seconds{length};
    s.read_seconds("network_delay", e.network_delay);
    s.read_seconds("clock_asynchrony", e.clock_asynchrony);
    if (const auto* thr = s.find("thr")) {
        if (!thr->is_number_integer() || thr->get<std::int64_t>() < 0) invalid(s.key("thr"), "expected a non-negative integer");
        e.thr = thr->get<std::uint64_t>();
    } else {
        e.thr = compute_thr(e.network_delay, e.clock_asynchrony, e.length);
    }
    s.finish();
}

void parse_deposit(Section s, DepositPolicy& d) {
    s.read_uint("v", d.v);
    s.read_uint("f", d.f);
    s.read_uint("s", d.s);
    double rho = s.read_number("reward_fraction", static_cast<double>(d.reward_ppm) / kPpmOne);
    if (!(rho > 0.0 && rho <= 1.0)) invalid(s.key("reward_fraction"), "must be in (0, 1]");
    d.reward_ppm = static_cast<std::uint32_t>(std::llround(rho * kPpmOne));
    s.finish();
}

void parse_registry(Section s, RegistrySimConfig& r) {
    s.read_uint("commit_window", r.commit_window);
    s.read_seconds("confirmation_latency", r.confirmation_latency);
    s.read_seconds("block_interval", r.block_interval);
    std::string ordering = "fifo";
    s.read_string("ordering", ordering);
    if (ordering == "fifo") {
        r.ordering = RegistrySimConfig::Ordering::Fifo;
    } else if (ordering == "random") {
        r.ordering = RegistrySimConfig::Ordering::Random;
    } else {
        invalid(s.key("ordering"), "expected fifo | random");
    }
    s.finish();
}

std::vector<std::string> string_list(const json& v, const std::string& key) {
    if (!v.is_array()) invalid(key, "expected an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) invalid(key, "expected an array of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

ScriptStep parse_step(Section s) {
    ScriptStep step;
    const auto* time = s.find("time");
    if (!time) invalid(s.key("time"), "required");
    step.time = Section::seconds_value(*time, s.key("time"));
    const auto* actor = s.find("actor");
    if (!actor || !actor->is_number_integer() || actor->get<std::int64_t>() < 0) {
        invalid(s.key("actor"), "required non-negative peer index");
    }
    step.actor = actor->get<std::size_t>();
    std::string action;
    s.read_string("action", action);

    if (action == "publish") {
        PublishAction a;
        s.read_string("message", a.message);
        step.action = a;
    } else if (action == "spam") {
        SpamAction a;
        const auto* msgs = s.find("messages");
        if (!msgs) invalid(s.key("messages"), "required");
        a.messages = string_list(*msgs, s.key("messages"));
        if (a.messages.empty()) invalid(s.key("messages"), "needs at least one message");
        s.read_index_list("targets", a.targets);
        step.action = a;
    } else if (action == "epoch_shift") {
        EpochShiftAction a;
        const auto* offsets = s.find("offsets");
        if (!offsets || !offsets->is_array()) invalid(s.key("offsets"), "required array of integers");
        for (const auto& o : *offsets) {
            if (!o.is_number_integer()) invalid(s.key("offsets"), "expected integers");
            a.offsets.push_back(o.get<std::int64_t>());
        }
        s.read_string("message", a.message);
        step.action = a;
    } else if (action == "forge") {
        ForgeAction a;
        s.read_uint("count", a.count);
        s.read_string("message", a.message);
        step.action = a;
    } else if (action == "register") {
        step.action = RegisterAction{};
    } else if (action == "withdraw") {
        step.action = WithdrawAction{};
    } else if (action == "multi_register") {
        MultiRegisterAction a;
        s.read_uint("k", a.k);
        if (a.k == 0) invalid(s.key("k"), "must be >= 1");
        step.action = a;
    } else if (action == "multi_publish") {
        MultiPublishAction a;
        s.read_string("message", a.message);
        step.action = a;
    } else {
        invalid(s.key("action"),
                "expected publish | spam | epoch_shift | forge | register | withdraw | multi_register | multi_publish");
    }
    s.finish();
    return step;
}

}  // namespace

void validate(const SimConfig& c) {
    if (c.peers < 2) invalid("peers", "need at least 2 peers");
    if (c.start_time < 0) invalid("start_time", "must be non-negative");
    if (c.epoch.length.count() < 1) invalid("epoch.T", "epoch length must be >= 1 second");
    if (c.tree_depth < 1 || c.tree_depth > MerkleTree::kMaxDepth) invalid("tree_depth", "must be in [1, 32]");
    if (c.effective_sync_interval().count() <= 0) invalid("sync_interval", "must be > 0");
    if (c.root_window == 0) invalid("root_window", "must be >= 1");
    if (c.seen_capacity == 0) invalid("seen_capacity", "must be >= 1");
    try {
        c.deposit.validate();
    } catch (const Error& e) {
        throw Error(Errc::ConfigValidation, e.what());
    }
    auto check_peers = [&](const std::vector<std::size_t>& list, const std::string& key) {
        for (auto p : list) {
            if (p >= c.peers) invalid(key, "peer index " + std::to_string(p) + " out of range");
        }
    };
    if (c.members) check_peers(*c.members, "members");
    if (c.slashers) check_peers(*c.slashers, "slashers");
    check_peers(c.copiers, "copiers");
    check_peers(c.withhold_reveal, "withhold_reveal");
    for (std::size_t i = 0; i < c.script.size(); ++i) {
        const auto key = "script[" + std::to_string(i) + "]";
        if (c.script[i].actor >= c.peers) invalid(key + ".actor", "peer index out of range");
        if (const auto* spam = std::get_if<SpamAction>(&c.script[i].action)) {
            check_peers(spam->targets, key + ".targets");
            if (!spam->targets.empty() && spam->targets.size() != spam->messages.size()) {
                invalid(key + ".targets", "needs one target per message");
            }
        }
    }
}

SimConfig parse_config(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(Errc::ConfigParse, e.what());
    }

    SimConfig c;
    Section s(root, "");
    s.read_uint("seed", c.seed);
    s.read_uint("peers", c.peers);
    s.read_int("start_time", c.start_time);
    if (const auto* t = s.find("topology")) parse_topology(Section(*t, "topology"), c.topology);
    if (const auto* d = s.find("link_delay")) parse_delay(Section(*d, "link_delay"), c.link_delay);
    s.read_seconds("clock_offset_max", c.clock_offset_max);
    if (const auto* e = s.find("epoch")) parse_epoch(Section(*e, "epoch"), c.epoch);
    if (const auto* d = s.find("deposit")) parse_deposit(Section(*d, "deposit"), c.deposit);
    if (const auto* r = s.find("registry")) parse_registry(Section(*r, "registry"), c.registry);
    s.read_uint("tree_depth", c.tree_depth);
    s.read_seconds("sync_interval", c.sync_interval);
    s.read_uint("seen_capacity", c.seen_capacity);
    s.read_uint("root_window", c.root_window);
    s.read_index_list_or_all("members", c.members);
    s.read_index_list_or_all("slashers", c.slashers);
    s.read_index_list("copiers", c.copiers);
    s.read_index_list("withhold_reveal", c.withhold_reveal);
    s.read_seconds("reveal_delay", c.reveal_delay);
    s.read_seconds("retry_delay", c.retry_delay);
    s.read_uint("max_reveal_attempts", c.max_reveal_attempts);
    s.read_seconds("copier_reaction", c.copier_reaction);
    s.read_seconds("until", c.until);
    if (const auto* script = s.find("script")) {
        if (!script->is_array()) invalid("script", "expected an array of steps");
        for (std::size_t i = 0; i < script->size(); ++i) {
            c.script.push_back(parse_step(Section((*script)[i], "script[" + std::to_string(i) + "]")));
        }
    }
    s.finish();
    validate(c);
    return c;
}

SimConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace rln::sim
