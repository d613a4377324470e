#include "rln/epoch.hpp"

#include <stdexcept>

namespace rln {

Epoch current_epoch(std::int64_t unix_seconds, std::int64_t epoch_seconds) {
    if (epoch_seconds < 1) throw std::invalid_argument("epoch length must be >= 1 second");
    if (unix_seconds < 0) throw std::invalid_argument("unix time must be non-negative");
    return Epoch{static_cast<std::uint64_t>(unix_seconds / epoch_seconds)};
}

Epoch current_epoch(std::chrono::microseconds unix_time, std::chrono::seconds epoch_length) {
    if (epoch_length.count() < 1) throw std::invalid_argument("epoch length must be >= 1 second");
    if (unix_time.count() < 0) throw std::invalid_argument("unix time must be non-negative");
    auto t = std::chrono::duration_cast<std::chrono::microseconds>(epoch_length).count();
    return Epoch{static_cast<std::uint64_t>(unix_time.count() / t)};
}

std::uint64_t compute_thr(std::chrono::microseconds network_delay, std::chrono::microseconds clock_asynchrony,
                          std::chrono::seconds epoch_length) {
    if (epoch_length.count() < 1) throw std::invalid_argument("epoch length must be >= 1 second");
    if (network_delay.count() < 0 || clock_asynchrony.count() < 0) {
        throw std::invalid_argument("delays must be non-negative");
    }
    auto budget = static_cast<std::uint64_t>((network_delay + clock_asynchrony).count());
    auto t = static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::microseconds>(epoch_length).count());
    return (budget + t - 1) / t;
}

EpochConfig derive_epoch_config(std::chrono::seconds epoch_length, std::chrono::microseconds network_delay,
                                std::chrono::microseconds clock_asynchrony) {
    EpochConfig cfg;
    cfg.length = epoch_length;
    cfg.network_delay = network_delay;
    cfg.clock_asynchrony = clock_asynchrony;
    cfg.thr = compute_thr(network_delay, clock_asynchrony, epoch_length);
    return cfg;
}

}  // namespace rln
