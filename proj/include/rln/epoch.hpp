#pragma once

#include <chrono>
#include <compare>
#include <cstdint>

#include "rln/field.hpp"

namespace rln {

// Index of a T-second window since the Unix epoch; doubles as the external nullifier.
struct Epoch {
    std::uint64_t index = 0;

    FieldElement to_field() const { return FieldElement(index); }
    friend auto operator<=>(const Epoch&, const Epoch&) = default;
};

struct EpochConfig {
    std::chrono::seconds length{30};  // T
    std::uint64_t thr = 1;            // max tolerated epoch gap
    std::chrono::microseconds network_delay{0};
    std::chrono::microseconds clock_asynchrony{0};
};

// floor(unix_time / T). Throws std::invalid_argument for T < 1 or negative time.
Epoch current_epoch(std::int64_t unix_seconds, std::int64_t epoch_seconds);
Epoch current_epoch(std::chrono::microseconds unix_time, std::chrono::seconds epoch_length);

// ceil((network_delay + clock_asynchrony) / T).
std::uint64_t compute_thr(std::chrono::microseconds network_delay, std::chrono::microseconds clock_asynchrony,
                          std::chrono::seconds epoch_length);

// Fills cfg.thr from the delay budget.
EpochConfig derive_epoch_config(std::chrono::seconds epoch_length, std::chrono::microseconds network_delay,
                                std::chrono::microseconds clock_asynchrony);

}  // namespace rln
