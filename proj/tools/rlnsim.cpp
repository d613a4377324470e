// rlnsim: run gossip simulations and inspect protocol arithmetic.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

#include "rln/core.hpp"
#include "rln/epoch.hpp"
#include "rln/errors.hpp"
#include "rln/sim/config.hpp"
#include "rln/sim/report.hpp"
#include "rln/sim/simulation.hpp"

namespace {

using namespace rln;

constexpr int kExitError = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path);
    return {std::istreambuf_iterator<char>(in), {}};
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::Io, "cannot write " + path);
    out << text;
}

Micros seconds_to_micros(double s) {
    if (!std::isfinite(s) || s < 0) throw Error(Errc::ConfigValidation, "durations must be non-negative seconds");
    return Micros{std::llround(s * 1e6)};
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out, bool machine) {
    auto config = sim::load_config(config_path);
    if (seed) config.seed = *seed;
    sim::Simulation simulation(config);
    const auto report = simulation.run();
    write_output(out, machine ? report.to_machine() : report.to_text());
    return 0;
}

nlohmann::ordered_json vectors() {
    using ojson = nlohmann::ordered_json;
    ojson cases = ojson::array();
    Rng rng(20220214);
    for (int i = 0; i < 20; ++i) {
        const auto sk = random_field_element(rng);
        const Epoch epoch{54827003 + uniform_below(rng, 1000)};
        const auto m = "message-" + std::to_string(i);
        const auto share = compute_share(sk, epoch, m);
        ojson c;
        c["sk"] = sk.to_hex();
        c["epoch"] = epoch.index;
        c["m"] = m;
        c["x"] = share.x.to_hex();
        c["a1"] = share_coefficient(sk, epoch).to_hex();
        c["y"] = share.y.to_hex();
        c["nullifier"] = compute_internal_nullifier(sk, epoch).to_hex();
        c["pk"] = identity_commitment(sk).to_hex();
        cases.push_back(c);
    }
    ojson doc;
    doc["field_modulus"] = std::string(kFieldModulusHex);
    doc["message_hash_hello"] = message_hash("hello").to_hex();
    doc["epoch_example"] = ojson{{"unix", 1644810116}, {"T", 30}, {"epoch", current_epoch(1644810116, 30).index}};
    doc["cases"] = cases;
    return doc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RLN gossip spam-protection simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a simulation from a JSON config");
    std::string config_path, out_path;
    std::optional<std::uint64_t> seed;
    bool machine = false;
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out_path, "Write the report here instead of stdout");
    run->add_flag("--machine", machine, "Emit the report as JSON");

    auto* vec = app.add_subcommand("vectors", "Emit reference vectors as JSON");
    std::string vectors_out;
    vec->add_option("--out", vectors_out, "Output file");

    auto* epoch = app.add_subcommand("epoch", "Epoch index for a unix time");
    std::int64_t unix_time = 0, epoch_length = 0;
    epoch->add_option("unix", unix_time)->required();
    epoch->add_option("T", epoch_length, "Epoch length in seconds")->required();

    auto* thr = app.add_subcommand("thr", "Epoch acceptance window from delay and clock skew");
    double delay = 0, async = 0;
    std::int64_t thr_length = 0;
    thr->add_option("network_delay", delay, "Seconds")->required();
    thr->add_option("clock_asynchrony", async, "Seconds")->required();
    thr->add_option("T", thr_length, "Epoch length in seconds")->required();

    auto* diff = app.add_subcommand("report-diff", "Compare two reports; exit 0 iff equal");
    std::string diff_a, diff_b;
    diff->add_option("a", diff_a)->required();
    diff->add_option("b", diff_b)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, seed, out_path, machine);
        if (*vec) {
            write_output(vectors_out, vectors().dump(2) + "\n");
            return 0;
        }
        if (*epoch) {
            if (epoch_length < 1) throw Error(Errc::ConfigValidation, "\"T\": epoch length must be >= 1 second");
            std::cout << current_epoch(unix_time, epoch_length).index << "\n";
            return 0;
        }
        if (*thr) {
            if (thr_length < 1) throw Error(Errc::ConfigValidation, "\"T\": epoch length must be >= 1 second");
            std::cout << compute_thr(seconds_to_micros(delay), seconds_to_micros(async), std::chrono::seconds{thr_length})
                      << "\n";
            return 0;
        }
        if (*diff) {
            const auto a = sim::flatten_report(read_file(diff_a));
            const auto b = sim::flatten_report(read_file(diff_b));
            const auto lines = sim::diff_reports(a, b);
            for (const auto& l : lines) std::cout << l << "\n";
            return lines.empty() ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return 0;
}
