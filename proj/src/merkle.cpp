#include "rln/merkle.hpp"

#include <algorithm>

#include "rln/errors.hpp"
#include "rln/hash.hpp"

namespace rln {

namespace {
constexpr std::uint8_t kSnapshotMagic[4] = {'R', 'L', 'N', 'T'};

std::vector<FieldElement> empty_hashes(std::uint32_t depth) {
    std::vector<FieldElement> out{kNilLeaf};
    out.reserve(depth + 1);
    for (std::uint32_t h = 1; h <= depth; ++h) out.push_back(parent_hash(h, out.back(), out.back()));
    return out;
}
}  // namespace

FieldElement parent_hash(std::uint32_t level, const FieldElement& left, const FieldElement& right) {
    const std::uint8_t level_byte[1] = {static_cast<std::uint8_t>(level)};
    return hash_to_field(Domain::Commitment, {ByteView(level_byte), left, right});
}

FieldElement empty_root(std::uint32_t depth) {
    if (depth < 1 || depth > MerkleTree::kMaxDepth) {
        throw Error(Errc::DepthOutOfRange, "depth " + std::to_string(depth));
    }
    return empty_hashes(depth).back();
}

MerkleTree::MerkleTree(std::uint32_t depth) : depth_(depth) {
    if (depth < 1 || depth > kMaxDepth) throw Error(Errc::DepthOutOfRange, "depth " + std::to_string(depth));
    empty_ = empty_hashes(depth);
    levels_.resize(depth + 1);
}

const FieldElement& MerkleTree::node(std::uint32_t level, std::uint64_t index) const {
    const auto& m = levels_[level];
    auto it = m.find(index);
    return it == m.end() ? empty_[level] : it->second;
}

const FieldElement& MerkleTree::root() const { return node(depth_, 0); }

void MerkleTree::check_index(std::uint64_t index) const {
    if (index >= capacity()) {
        throw Error(Errc::IndexOutOfRange,
                    "index " + std::to_string(index) + " >= capacity " + std::to_string(capacity()));
    }
}

FieldElement MerkleTree::leaf(std::uint64_t index) const {
    check_index(index);
    return node(0, index);
}

void MerkleTree::set_leaf(std::uint64_t index, const FieldElement& value) {
    check_index(index);
    auto store = [this](std::uint32_t level, std::uint64_t i, const FieldElement& v) {
        if (v == empty_[level]) {
            levels_[level].erase(i);
        } else {
            levels_[level][i] = v;
        }
    };
    store(0, index, value);
    FieldElement current = value;
    std::uint64_t i = index;
    for (std::uint32_t level = 1; level <= depth_; ++level) {
        const auto& sibling = node(level - 1, i ^ 1);
        current = (i & 1) ? parent_hash(level, sibling, current) : parent_hash(level, current, sibling);
        i >>= 1;
        store(level, i, current);
    }
}

AuthPath MerkleTree::auth_path(std::uint64_t index) const {
    check_index(index);
    AuthPath path{index, {}};
    path.siblings.reserve(depth_);
    std::uint64_t i = index;
    for (std::uint32_t level = 0; level < depth_; ++level) {
        path.siblings.push_back(node(level, i ^ 1));
        i >>= 1;
    }
    return path;
}

void MerkleTree::apply_event(const RegistryEvent& event) {
    if (event.sequence != last_sequence_ + 1) {
        throw Error(Errc::SequenceGap, "expected sequence " + std::to_string(last_sequence_ + 1) + ", got " +
                                           std::to_string(event.sequence));
    }
    set_leaf(event.index, event.kind == RegistryEvent::Kind::Insert ? event.pk : kNilLeaf);
    last_sequence_ = event.sequence;
}

std::vector<std::pair<std::uint64_t, FieldElement>> MerkleTree::leaves() const {
    std::vector<std::pair<std::uint64_t, FieldElement>> out(levels_[0].begin(), levels_[0].end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

Bytes MerkleTree::export_snapshot() const {
    ByteWriter w;
    w.put_raw(kSnapshotMagic);
    w.put_u32(depth_);
    w.put_u64(last_sequence_ + 1);
    auto occupied_leaves = leaves();
    w.put_u64(occupied_leaves.size());
    for (const auto& [index, value] : occupied_leaves) {
        w.put_u64(index);
        w.put_raw(value.to_bytes());
    }
    return std::move(w).take();
}

MerkleTree MerkleTree::import_snapshot(ByteView data) {
    ByteReader r(data);
    auto magic = r.get_raw(4);
    if (!std::equal(magic.begin(), magic.end(), std::begin(kSnapshotMagic))) {
        throw Error(Errc::Decode, "bad tree snapshot magic");
    }
    MerkleTree tree(r.get_u32());
    auto next_sequence = r.get_u64();
    if (next_sequence == 0) throw Error(Errc::Decode, "next sequence must be >= 1");
    auto count = r.get_u64();
    std::uint64_t prev = 0;
    for (std::uint64_t n = 0; n < count; ++n) {
        auto index = r.get_u64();
        if (n > 0 && index <= prev) throw Error(Errc::Decode, "snapshot indices not strictly increasing");
        auto value = FieldElement::from_bytes(r.get_raw(kFieldBytes));
        if (!value) throw Error(Errc::Decode, "non-canonical leaf");
        tree.set_leaf(index, *value);
        prev = index;
    }
    if (!r.done()) throw Error(Errc::Decode, "trailing bytes after snapshot");
    tree.last_sequence_ = next_sequence - 1;
    return tree;
}

bool verify_path(const FieldElement& root, const FieldElement& leaf, const AuthPath& path) {
    if (path.siblings.empty() || path.siblings.size() > MerkleTree::kMaxDepth) return false;
    if (path.siblings.size() < 64 && (path.index >> path.siblings.size()) != 0) return false;
    FieldElement current = leaf;
    std::uint64_t i = path.index;
    for (std::uint32_t level = 1; level <= path.siblings.size(); ++level) {
        const auto& sibling = path.siblings[level - 1];
        current = (i & 1) ? parent_hash(level, sibling, current) : parent_hash(level, current, sibling);
        i >>= 1;
    }
    return current == root;
}

}  // namespace rln
