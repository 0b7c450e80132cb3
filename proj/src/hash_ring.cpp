#include "fishlab/hash_ring.hpp"

#include <algorithm>

namespace fishlab {

std::uint32_t ring_hash(std::string_view data, std::uint64_t seed) {
    std::uint32_t h = 2166136261u;
    for (int shift = 56; shift >= 0; shift -= 8) {
        h ^= static_cast<std::uint8_t>(seed >> shift);
        h *= 16777619u;
    }
    for (unsigned char c : data) {
        h ^= c;
        h *= 16777619u;
    }
    return h;
}

std::uint32_t mix32(std::uint32_t h) {
    h ^= h >> 16;
    h *= 0x85ebca6bu;
    h ^= h >> 13;
    h *= 0xc2b2ae35u;
    h ^= h >> 16;
    return h;
}

HashRing::HashRing(std::uint32_t vnodes, std::uint64_t seed) : vnodes_(vnodes), seed_(seed) {
    if (vnodes_ == 0) throw ConfigError("vnodes must be positive");
}

void HashRing::add_worker(WorkerId w) {
    if (contains(w)) throw std::invalid_argument("add_worker: worker already on ring");
    auto& spots = vnode_positions_[w];
    spots.reserve(vnodes_);
    const std::string wid = std::to_string(w);
    for (std::uint32_t i = 0; i < vnodes_; ++i) {
        std::string label = wid;
        label.push_back('\0');
        label += std::to_string(i);
        std::uint32_t pos = mix32(ring_hash(label, seed_));
        while (positions_.count(pos)) ++pos;  // wraps mod 2^32
        positions_.emplace(pos, w);
        spots.push_back(pos);
    }
}

void HashRing::remove_worker(WorkerId w) {
    auto it = vnode_positions_.find(w);
    if (it == vnode_positions_.end()) throw std::invalid_argument("remove_worker: unknown worker");
    if (vnode_positions_.size() == 1) throw StateError("remove_worker: last worker on ring");
    for (std::uint32_t pos : it->second) positions_.erase(pos);
    vnode_positions_.erase(it);
}

std::vector<WorkerId> HashRing::candidates(std::string_view key, std::uint32_t d) const {
    if (positions_.empty()) throw StateError("candidates: empty ring");
    if (d == 0) throw std::invalid_argument("candidates: d must be >= 1");

    const std::uint32_t want =
        std::min<std::uint32_t>(d, static_cast<std::uint32_t>(vnode_positions_.size()));
    std::vector<WorkerId> out;
    out.reserve(want);
    auto it = positions_.lower_bound(key_position(key));
    while (out.size() < want) {
        if (it == positions_.end()) it = positions_.begin();
        if (std::find(out.begin(), out.end(), it->second) == out.end())
            out.push_back(it->second);
        ++it;
    }
    return out;
}

WorkerId HashRing::owner(std::string_view key) const { return candidates(key, 1).front(); }

std::uint32_t HashRing::key_position(std::string_view key) const {
    return mix32(ring_hash(key, seed_));
}

}  // namespace fishlab
