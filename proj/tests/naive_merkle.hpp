#pragma once

#include <vector>

#include "rln/merkle.hpp"

// Dense full recomputation; the reference the incremental tree is checked against.
inline rln::FieldElement naive_root(std::uint32_t depth, const std::vector<rln::FieldElement>& leaves) {
    std::vector<rln::FieldElement> level = leaves;
    level.resize(std::size_t{1} << depth, rln::kNilLeaf);
    for (std::uint32_t h = 1; h <= depth; ++h) {
        std::vector<rln::FieldElement> up(level.size() / 2);
        for (std::size_t i = 0; i < up.size(); ++i) up[i] = rln::parent_hash(h, level[2 * i], level[2 * i + 1]);
        level = std::move(up);
    }
    return level[0];
}
