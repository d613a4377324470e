#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "rln/field.hpp"

namespace rln {

// Empty slot value; deletion writes this.
inline const FieldElement kNilLeaf{};

struct AuthPath {
    std::uint64_t index = 0;
    std::vector<FieldElement> siblings;  // leaf-to-root

    friend bool operator==(const AuthPath&, const AuthPath&) = default;
};

struct RegistryEvent {
    enum class Kind : std::uint8_t { Insert = 1, Delete = 2 };

    std::uint64_t sequence = 0;  // first event is 1
    Kind kind = Kind::Insert;
    std::uint64_t index = 0;
    FieldElement pk;  // kNilLeaf for Delete

    friend bool operator==(const RegistryEvent&, const RegistryEvent&) = default;
};

// Interior node at height `level` (1 = parent of leaves):
// hash_to_field(Commitment, [level byte, left, right]).
FieldElement parent_hash(std::uint32_t level, const FieldElement& left, const FieldElement& right);

// Root of a tree of the given depth with every leaf kNilLeaf.
FieldElement empty_root(std::uint32_t depth);

// Identity-commitment tree. Only nodes that differ from the empty subtree of
// their height are stored, so a depth-20 tree costs O(members * depth) memory.
class MerkleTree {
public:
    static constexpr std::uint32_t kDefaultDepth = 20;
    static constexpr std::uint32_t kMaxDepth = 32;

    // Throws Error(Errc::DepthOutOfRange) outside [1, 32].
    explicit MerkleTree(std::uint32_t depth = kDefaultDepth);

    std::uint32_t depth() const { return depth_; }
    std::uint64_t capacity() const { return std::uint64_t{1} << depth_; }
    const FieldElement& root() const;
    FieldElement leaf(std::uint64_t index) const;
    std::uint64_t occupied() const { return levels_[0].size(); }

    void set_leaf(std::uint64_t index, const FieldElement& value);
    AuthPath auth_path(std::uint64_t index) const;

    // Sequence number of the last applied registry event (0: none).
    std::uint64_t last_sequence() const { return last_sequence_; }
    // Throws Error(Errc::SequenceGap) unless event.sequence == last_sequence() + 1.
    void apply_event(const RegistryEvent& event);

    // Occupied leaves in ascending index order.
    std::vector<std::pair<std::uint64_t, FieldElement>> leaves() const;

    // Flat binary snapshot: "RLNT", u32 depth, u64 next sequence, u64 count,
    // then count x (u64 index, 32-byte leaf). All integers big-endian.
    Bytes export_snapshot() const;
    static MerkleTree import_snapshot(ByteView data);

private:
    const FieldElement& node(std::uint32_t level, std::uint64_t index) const;
    void check_index(std::uint64_t index) const;

    std::uint32_t depth_;
    std::uint64_t last_sequence_ = 0;
    std::vector<FieldElement> empty_;  // empty_[h]: root of an empty height-h subtree
    std::vector<std::unordered_map<std::uint64_t, FieldElement>> levels_;
};

bool verify_path(const FieldElement& root, const FieldElement& leaf, const AuthPath& path);

}  // namespace rln
