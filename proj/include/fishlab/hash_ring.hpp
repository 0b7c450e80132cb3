#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fishlab/types.hpp"

namespace fishlab {

/// FNV-1a over the seed (8 bytes, big-endian) followed by data.
std::uint32_t ring_hash(std::string_view data, std::uint64_t seed);

/// Bijective 32-bit finalizer (the murmur3 tail). FNV-1a barely avalanches
/// its low bits for short inputs that differ in the last character, which
/// describes decimal keys and vnode labels exactly; mixing the digest keeps
/// ring arcs from clustering per worker.
std::uint32_t mix32(std::uint32_t h);

/// Consistent hashing over the 32-bit ring with virtual nodes.
///
/// Each worker owns `vnodes` positions, placed at the hash of
/// "<worker>\0<index>" (decimal renderings). Position collisions are
/// resolved at insert time by probing upward. A key belongs to the first
/// position clockwise of its hash; hot keys use the first d distinct
/// physical workers along the same walk, so their candidate sets remap
/// just as minimally under churn as single owners do.
class HashRing {
public:
    explicit HashRing(std::uint32_t vnodes = 16, std::uint64_t seed = 0);

    /// Inserts the worker's virtual nodes. Throws on duplicates.
    void add_worker(WorkerId w);

    /// Removes all of the worker's positions; its keys fall to their
    /// clockwise successors. Throws StateError when removing the last
    /// worker, std::invalid_argument when the worker is unknown.
    void remove_worker(WorkerId w);

    /// First min(d, workers) distinct physical workers clockwise from the
    /// key's hash, in walk order.
    std::vector<WorkerId> candidates(std::string_view key, std::uint32_t d) const;

    /// Equivalent to candidates(key, 1)[0].
    WorkerId owner(std::string_view key) const;

    /// Ring coordinate a key's walk starts from: mix32(ring_hash(key, seed)).
    std::uint32_t key_position(std::string_view key) const;

    bool contains(WorkerId w) const { return vnode_positions_.count(w) != 0; }
    std::size_t worker_count() const { return vnode_positions_.size(); }
    std::uint32_t vnodes() const { return vnodes_; }
    std::uint64_t seed() const { return seed_; }

    /// Position table snapshot, for inspection and test oracles.
    const std::map<std::uint32_t, WorkerId>& positions() const { return positions_; }

private:
    std::uint32_t vnodes_;
    std::uint64_t seed_;
    std::map<std::uint32_t, WorkerId> positions_;
    std::unordered_map<WorkerId, std::vector<std::uint32_t>> vnode_positions_;
};

}  // namespace fishlab
